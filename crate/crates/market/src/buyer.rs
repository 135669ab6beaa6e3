//! Buyers place and cancel orders when told to, and record the answers they get.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::rc::Rc;

use dataspace_core::dataspace::{ActorId, Dataspace};
use dataspace_core::facets::{Ctx, FacetActor, FacetId, Field};
use dataspace_core::forms::query_map;
use dataspace_core::rec;
use dataspace_core::values::{Pattern, Value};
use log::warn;

use crate::protocol::{order_result_pattern, Answer, Order, BROKER};

/// Message `(buyer-place account ref n p)`.
pub const BUYER_PLACE: &str = "buyer-place";
/// Message `(buyer-cancel account ref)`.
pub const BUYER_CANCEL: &str = "buyer-cancel";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub buyer: Value,
    pub order: Value,
    pub answer: Option<Answer>,
}

/// Outcomes by script reference, shared with the scenario runner.
pub type Outcomes = Rc<RefCell<BTreeMap<Value, Outcome>>>;

pub fn place(account: &Value, reference: &Value, shares: i64, max_price: i64) -> Value {
    rec!(BUYER_PLACE, account, reference, shares, max_price)
}

pub fn cancel(account: &Value, reference: &Value) -> Value {
    rec!(BUYER_CANCEL, account, reference)
}

/// Cheapest advertised broker, ties to the smaller name.
fn pick_broker(brokers: &BTreeMap<Value, Value>) -> Option<Value> {
    brokers.iter().filter_map(|(name, fee)| Some((fee.as_integer()?, name.clone()))).min().map(|(_, n)| n)
}

/// `choose_broker` makes orders name a broker picked from `(broker name fee)` adverts.
pub fn buyer(ctx: &mut Ctx<'_, '_>, account: Value, choose_broker: bool, outcomes: Outcomes) {
    let brokers = choose_broker.then(|| {
        query_map(ctx, Pattern::record(BROKER, vec![Pattern::capture("name"), Pattern::capture("fee")]), "name", "fee")
    });
    let orders: Field<BTreeMap<Value, FacetId>> = ctx.field(BTreeMap::new());
    let me = account.clone();
    let placing = Pattern::record(
        BUYER_PLACE,
        vec![Pattern::lit(account.clone()), Pattern::capture("ref"), Pattern::capture("n"), Pattern::capture("p")],
    );
    ctx.on_message(placing, move |ctx, m| {
        let reference = m.at("ref").clone();
        let (Some(n), Some(p)) = (m.at("n").as_integer(), m.at("p").as_integer()) else {
            warn!("buyer {me}: malformed {}", m.value);
            return;
        };
        if outcomes.borrow().contains_key(&reference) {
            warn!("buyer {me}: order {reference} already placed");
            return;
        }
        let broker = match &brokers {
            None => None,
            Some(b) => match ctx.with(b, pick_broker) {
                Some(name) => Some(name),
                None => {
                    warn!("buyer {me}: no broker advertised; order {reference} not placed");
                    return;
                }
            },
        };
        let id = ctx.fresh_unique();
        let order = Order::new(id, broker, me.clone(), n, p);
        outcomes
            .borrow_mut()
            .insert(reference.clone(), Outcome { buyer: me.clone(), order: order.value.clone(), answer: None });
        let outcomes = outcomes.clone();
        ctx.react_named(format!("awaiting {reference}"), move |ctx| {
            let awaiting = ctx.facet_id();
            let r = reference.clone();
            ctx.on_asserted(order_result_pattern(&order.value), move |ctx, m| {
                if let Some(o) = outcomes.borrow_mut().get_mut(&r) {
                    o.answer = o.answer.or(Answer::from_value(m.at("ans")));
                }
                ctx.stop(&awaiting);
            });
            let value = order.value.clone();
            let placed = ctx.react_named(format!("order {reference}"), move |ctx| {
                ctx.assert_value(value);
            });
            ctx.update(&orders, |o| o.insert(reference, placed));
        });
    });
    let me = account.clone();
    ctx.on_message(
        Pattern::record(BUYER_CANCEL, vec![Pattern::lit(account), Pattern::capture("ref")]),
        move |ctx, m| {
            let reference = m.at("ref");
            match ctx.with(&orders, |o| o.get(reference).cloned()) {
                Some(f) if ctx.is_alive(&f) => ctx.stop(&f),
                Some(_) => warn!("buyer {me}: order {reference} already finished"),
                None => warn!("buyer {me}: cancel of unknown order {reference}"),
            }
        },
    );
}

pub fn spawn_buyer(ds: &mut Dataspace, account: &Value, choose_broker: bool, outcomes: Outcomes) -> ActorId {
    let label = format!("buyer {account}");
    let account = account.clone();
    ds.spawn(label.clone(), FacetActor::boxed(label, move |ctx| buyer(ctx, account, choose_broker, outcomes)))
}
