//! The broker: one branch of behavior per order, paused while trading is closed.

use std::cell::RefCell;
use std::rc::Rc;

use dataspace_core::dataspace::{ActorId, Dataspace};
use dataspace_core::facets::{Ctx, FacetActor, FacetId, Field};
use dataspace_core::forms::{during, on_timeout, query_map, Goto, StateMachine};
use dataspace_core::rec;
use dataspace_core::values::{Pattern, Value};
use log::warn;

use crate::protocol::{
    funds_held, funds_needed, trading_day_open, Answer, Order, BROKER, ORDER, PRICE, PURCHASE_REQUEST, PURCHASE_RESULT,
};
use crate::wallet::{deposit, result_cache};

/// What the purchase state does when the buyer withdraws its order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum PurchaseCancel {
    /// No handler: the purchase goes ahead.
    #[default]
    Ignore,
    /// A cancel handler registered after the confirmation handler.
    After,
    /// A cancel handler registered before the confirmation handler.
    Before,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Purchase {
    pub order: Value,
    pub seller: Option<Value>,
    pub shares: i64,
    pub price: i64,
    pub fee: i64,
}

impl Purchase {
    pub fn spent(&self) -> i64 {
        self.shares * self.price + self.fee
    }
}

/// Completed purchases, shared with whoever runs the scenario.
#[derive(Debug, Clone, Default)]
pub struct Ledger(Rc<RefCell<Vec<Purchase>>>);

impl Ledger {
    pub fn record(&self, p: Purchase) {
        self.0.borrow_mut().push(p);
    }

    pub fn purchases(&self) -> Vec<Purchase> {
        self.0.borrow().clone()
    }

    /// Money that left the market: shares paid for plus fees.
    pub fn spent(&self) -> i64 {
        self.0.borrow().iter().map(Purchase::spent).sum()
    }
}

#[derive(Debug, Clone)]
pub struct BrokerConfig {
    /// Named brokers advertise `(broker name fee)` and pick among named sellers.
    pub name: Option<Value>,
    pub fee: i64,
    pub wait_ms: i64,
    pub on_cancel_in_purchase: PurchaseCancel,
    pub ledger: Ledger,
}

impl Default for BrokerConfig {
    fn default() -> Self {
        BrokerConfig {
            name: None,
            fee: 0,
            wait_ms: 100,
            on_cancel_in_purchase: PurchaseCancel::Ignore,
            ledger: Ledger::default(),
        }
    }
}

/// The first answer wins; later calls do nothing.
#[derive(Clone)]
struct StopWith {
    reason: Field<Option<Answer>>,
    order: Value,
    context: FacetId,
}

impl StopWith {
    fn call(&self, ctx: &mut Ctx<'_, '_>, answer: Answer) {
        if ctx.get(&self.reason).is_some() {
            return;
        }
        ctx.set(&self.reason, Some(answer));
        let order = self.order.clone();
        ctx.stop_then(&self.context, move |ctx| {
            ctx.spawn_facets(format!("order-result {answer}"), result_cache(order, answer));
        });
    }
}

/// Everything one order's behavior needs.
struct Job {
    order: Order,
    held: i64,
    stop_with: StopWith,
    cfg: Rc<BrokerConfig>,
}

type JobRef = Rc<Job>;

impl Job {
    /// Pay back `amount` for a fulfilled order, then answer.
    /// Other answers leave the refund to the wallet.
    fn return_stop(&self, ctx: &mut Ctx<'_, '_>, amount: i64, answer: Answer) {
        if answer == Answer::Fulfilled {
            deposit(ctx, self.order.account.clone(), amount);
        }
        self.stop_with.call(ctx, answer);
    }

    fn cancel_handler(job: &JobRef, ctx: &mut Ctx<'_, '_>) {
        let j = job.clone();
        ctx.on_retracted(Pattern::lit(job.order.value.clone()), move |ctx, _| {
            j.return_stop(ctx, j.held, Answer::Canceled)
        });
    }
}

fn order_pattern(name: &Option<Value>) -> Pattern {
    let c = Pattern::capture;
    match name {
        None => Pattern::record(ORDER, vec![c("id"), c("account"), c("n"), c("p")]),
        Some(b) => Pattern::record(ORDER, vec![c("id"), Pattern::lit(b.clone()), c("account"), c("n"), c("p")]),
    }
}

pub fn broker(ctx: &mut Ctx<'_, '_>, cfg: BrokerConfig) {
    if let Some(name) = &cfg.name {
        ctx.assert_value(rec!(BROKER, name, cfg.fee));
    }
    let cfg = Rc::new(cfg);
    during(ctx, Pattern::lit(trading_day_open()), move |ctx, _| {
        let cfg = cfg.clone();
        ctx.on_asserted(order_pattern(&cfg.name), move |ctx, m| {
            let Some(order) = Order::parse(&m.value) else {
                warn!("malformed order {}", m.value);
                return;
            };
            let cfg = cfg.clone();
            ctx.react_named(format!("order {}", order.id), move |ctx| {
                let stop_with =
                    StopWith { reason: ctx.field(None), order: order.value.clone(), context: ctx.facet_id() };
                let held = order.max_cost();
                work_on_one_order(ctx, Rc::new(Job { order, held, stop_with, cfg }));
            });
        });
    });
}

fn work_on_one_order(ctx: &mut Ctx<'_, '_>, job: JobRef) {
    let (j1, j2) = (job.clone(), job);
    StateMachine::new("acquire-funds")
        .state("request", move |ctx, go| request_funds(ctx, &j1, go))
        .state("funded", move |ctx, _| finish_funded(ctx, &j2))
        .start(ctx);
}

fn request_funds(ctx: &mut Ctx<'_, '_>, job: &JobRef, go: &Goto) {
    let o = &job.order;
    ctx.assert_value(funds_needed(&o.value, &o.account, job.held));
    let go = go.clone();
    ctx.on_asserted(Pattern::lit(funds_held(&o.value, &o.account, job.held, true)), move |ctx, _| {
        go.goto(ctx, "funded", vec![])
    });
    let j = job.clone();
    ctx.on_asserted(Pattern::lit(funds_held(&o.value, &o.account, job.held, false)), move |ctx, _| {
        j.stop_with.call(ctx, Answer::InsufficientFunds)
    });
    let j = job.clone();
    ctx.on_retracted(Pattern::lit(o.value.clone()), move |ctx, _| j.stop_with.call(ctx, Answer::Canceled));
}

fn finish_funded(ctx: &mut Ctx<'_, '_>, job: &JobRef) {
    let (j1, j2) = (job.clone(), job.clone());
    if job.cfg.name.is_none() {
        StateMachine::new("purchase-progress")
            .state("request", move |ctx, go| request_price(ctx, &j1, go))
            .state_with("purchase", &["actual"], move |ctx, _, args| {
                complete_purchase(ctx, &j2, None, args[0].as_integer().unwrap_or(0), None)
            })
            .start(ctx);
    } else {
        StateMachine::new("purchase-progress")
            .state("select", move |ctx, go| select_seller(ctx, &j1, go))
            .state_with("purchase", &["seller", "actual"], move |ctx, go, args| {
                complete_purchase(ctx, &j2, Some(args[0].clone()), args[1].as_integer().unwrap_or(0), Some(go))
            })
            .start(ctx);
    }
}

fn request_price(ctx: &mut Ctx<'_, '_>, job: &JobRef, go: &Goto) {
    let (j, go) = (job.clone(), go.clone());
    ctx.on_asserted(Pattern::record(PRICE, vec![Pattern::capture("actual")]), move |ctx, m| {
        match m.at("actual").as_integer() {
            Some(actual) if actual <= j.order.max_price => go.goto(ctx, "purchase", vec![Value::from(actual)]),
            _ => j.stop_with.call(ctx, Answer::NoPriceMatch),
        }
    });
    Job::cancel_handler(job, ctx);
}

fn select_seller(ctx: &mut Ctx<'_, '_>, job: &JobRef, go: &Goto) {
    let sellers = query_map(
        ctx,
        Pattern::record(PRICE, vec![Pattern::capture("seller"), Pattern::capture("actual")]),
        "seller",
        "actual",
    );
    Job::cancel_handler(job, ctx);
    let (j, go) = (job.clone(), go.clone());
    on_timeout(ctx, job.cfg.wait_ms, move |ctx| {
        let best = ctx.with(&sellers, |map| map.iter().filter_map(|(s, p)| Some((p.as_integer()?, s.clone()))).min());
        let o = &j.order;
        match best {
            Some((actual, seller)) if actual <= o.max_price && o.shares * actual + j.cfg.fee <= j.held => {
                go.goto(ctx, "purchase", vec![seller, Value::from(actual)])
            }
            _ => j.return_stop(ctx, j.held, Answer::NoPriceMatch),
        }
    });
}

fn complete_purchase(ctx: &mut Ctx<'_, '_>, job: &JobRef, seller: Option<Value>, actual: i64, go: Option<&Goto>) {
    let o = &job.order;
    let policy = job.cfg.on_cancel_in_purchase;
    if policy == PurchaseCancel::Before {
        Job::cancel_handler(job, ctx);
    }
    let (request, result) = match &seller {
        None => (rec!(PURCHASE_REQUEST, &o.value, o.shares, actual), rec!(PURCHASE_RESULT, &o.value, true)),
        Some(s) => (rec!(PURCHASE_REQUEST, &o.value, s, o.shares, actual), rec!(PURCHASE_RESULT, &o.value, s, true)),
    };
    ctx.assert_value(request);
    let j = job.clone();
    let sold_by = seller.clone();
    ctx.on_asserted(Pattern::lit(result), move |ctx, _| {
        let fee = j.cfg.fee;
        let o = &j.order;
        let purchase =
            Purchase { order: o.value.clone(), seller: sold_by.clone(), shares: o.shares, price: actual, fee };
        let leftover = j.held - purchase.spent();
        j.cfg.ledger.record(purchase);
        j.return_stop(ctx, leftover, Answer::Fulfilled);
    });
    if let (Some(s), Some(go)) = (seller, go) {
        let go = go.clone();
        ctx.on_retracted(Pattern::record(PRICE, vec![Pattern::lit(s), Pattern::Wildcard]), move |ctx, _| {
            go.goto(ctx, "select", vec![])
        });
    }
    if policy == PurchaseCancel::After {
        Job::cancel_handler(job, ctx);
    }
}

pub fn spawn_broker(ds: &mut Dataspace, cfg: BrokerConfig) -> ActorId {
    let label = match &cfg.name {
        Some(n) => format!("broker {n}"),
        None => "broker".to_owned(),
    };
    ds.spawn(label.clone(), FacetActor::boxed(label, move |ctx| broker(ctx, cfg)))
}
