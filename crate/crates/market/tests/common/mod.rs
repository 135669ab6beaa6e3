//! Fixtures shared by the market test targets.

#![allow(dead_code)]

use std::cell::RefCell;
use std::rc::Rc;

use dataspace_core::facets::FacetActor;
use dataspace_core::rec;
use dataspace_core::values::{Pattern, Value};
use dataspace_market::bank::published_balances;
use dataspace_market::broker::PurchaseCancel;
use dataspace_market::protocol::{order_result_pattern, Answer, Order, PRICE, PURCHASE_REQUEST, PURCHASE_RESULT};
use dataspace_market::scenario::{Market, ScenarioConfig, Setup};

pub struct Contradiction {
    pub answer: Option<Answer>,
    pub balance: i64,
    pub trace: String,
    pub failures: usize,
}

/// A trader that is both buyer and seller. On seeing the purchase request it
/// withdraws its order and confirms the purchase in the same turn, so the
/// broker gets the cancellation and the confirmation in one patch.
pub fn contradiction(policy: PurchaseCancel, seed: u64) -> Contradiction {
    let config = ScenarioConfig { on_cancel_in_purchase: policy, seed, ..ScenarioConfig::default() };
    let alice = Value::symbol("alice");
    let mut m = Market::new(config, &[Setup::Account(alice.clone(), 1000)]);
    let answer: Rc<RefCell<Option<Answer>>> = Rc::default();
    let seen = answer.clone();
    m.ds.spawn(
        "trader",
        FacetActor::boxed("trader", move |ctx| {
            let order = Order::new(ctx.fresh_unique(), None, alice, 5, 50);
            ctx.assert_value(rec!(PRICE, 40));
            let awaiting = ctx.react_named("awaiting", move |ctx| {
                let me = ctx.facet_id();
                let seen = seen.clone();
                ctx.on_asserted(order_result_pattern(&order.value), move |ctx, m| {
                    *seen.borrow_mut() = Answer::from_value(m.at("ans"));
                    ctx.stop(&me);
                });
                let o = order.value.clone();
                ctx.react_named("order", move |ctx| {
                    let placed = ctx.facet_id();
                    ctx.assert_value(o.clone());
                    let request = Pattern::lit(rec!(PURCHASE_REQUEST, &o, 5, 40));
                    ctx.on_asserted(request, move |ctx, _| {
                        let o = o.clone();
                        ctx.stop_then(&placed, move |ctx| {
                            ctx.react_named("confirm", move |ctx| {
                                ctx.assert_value(rec!(PURCHASE_RESULT, &o, true));
                            });
                        });
                    });
                });
            });
            let _ = awaiting;
        }),
    );
    m.quiesce(0);
    let balance = published_balances(&m.ds)[&Value::symbol("alice")];
    let answer = *answer.borrow();
    let r = m.finish(0);
    Contradiction { answer, balance, trace: r.trace_text(), failures: r.failures.len() }
}
