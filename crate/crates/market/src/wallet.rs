//! The wallet sits between broker and bank and keeps funds held across trading days.

use std::collections::BTreeSet;
use std::rc::Rc;

use dataspace_core::dataspace::{ActorId, Dataspace};
use dataspace_core::facets::{Ctx, FacetActor, Field, Trigger};
use dataspace_core::forms::stop_when;
use dataspace_core::values::{Pattern, Value};

use crate::protocol::{
    deposit_funds, funds_held, order_result_pattern, withdraw_funds, Answer, BANK_RESPONSE, FUNDS_NEEDED,
};

pub fn wallet(ctx: &mut Ctx<'_, '_>) {
    let processed: Field<BTreeSet<Value>> = ctx.field(BTreeSet::new());
    let needed = Pattern::record(
        FUNDS_NEEDED,
        vec![Pattern::capture("order"), Pattern::capture("account"), Pattern::capture("amt")],
    );
    ctx.on_asserted(needed, move |ctx, m| {
        let order = m.at("order").clone();
        if !ctx.update(&processed, |p| p.insert(order.clone())) {
            return;
        }
        let account = m.at("account").clone();
        let Some(amt) = m.at("amt").as_integer() else { return };
        ctx.react_named(format!("funding {order}"), move |ctx| funding(ctx, order, account, amt));
    });
}

/// One order's banking: withdraw, publish the outcome, settle once the order has a result.
fn funding(ctx: &mut Ctx<'_, '_>, order: Value, account: Value, amt: i64) {
    let parent = ctx.facet_id();
    ctx.assert_value(withdraw_funds(&order, &account, amt));
    // The first bank answer sticks; the bank repeats it every trading day.
    let answer: Field<Option<bool>> = ctx.field(None);
    let result: Field<Option<Answer>> = ctx.field(None);
    ctx.assert_with({
        let (order, account) = (order.clone(), account.clone());
        move |ctx| ctx.get(&answer).map(|ok| funds_held(&order, &account, amt, ok))
    });
    let settle = Rc::new(move |ctx: &mut Ctx<'_, '_>| {
        let (Some(ok), Some(ans)) = (ctx.get(&answer), ctx.get(&result)) else { return };
        let account = account.clone();
        ctx.stop_then(&parent, move |ctx| {
            if ok && ans != Answer::Fulfilled {
                deposit(ctx, account, amt);
            }
        });
    });
    let then = settle.clone();
    ctx.on_asserted(
        Pattern::record(BANK_RESPONSE, vec![Pattern::lit(order.clone()), Pattern::capture("ok")]),
        move |ctx, m| {
            if ctx.get(&answer).is_none() {
                ctx.set(&answer, Some(m.at("ok").as_bool() == Some(true)));
                then(ctx);
            }
        },
    );
    ctx.on_asserted(order_result_pattern(&order), move |ctx, m| {
        if ctx.get(&result).is_none() {
            ctx.set(&result, Answer::from_value(m.at("ans")));
            settle(ctx);
        }
    });
}

pub fn spawn_wallet(ds: &mut Dataspace) -> ActorId {
    ds.spawn("wallet", FacetActor::boxed("wallet", wallet))
}

/// Spawn a one-shot actor that pays `amt` into `account` and quits once the bank answers.
pub fn deposit(ctx: &mut Ctx<'_, '_>, account: Value, amt: i64) {
    if amt == 0 {
        return;
    }
    ctx.spawn_facets(format!("deposit {account} {amt}"), move |ctx| {
        let txn = ctx.fresh_unique();
        ctx.assert_value(deposit_funds(&txn, &account, amt));
        stop_when(ctx, Trigger::Asserted, Pattern::record(BANK_RESPONSE, vec![Pattern::lit(txn), Pattern::Wildcard]));
    });
}

/// Holds `(order-result order answer)` until nobody is waiting for it any more.
pub fn result_cache(order: Value, answer: Answer) -> impl FnOnce(&mut Ctx<'_, '_>) + 'static {
    move |ctx| {
        let root = ctx.facet_id();
        ctx.assert_value(crate::protocol::order_result(&order, answer));
        let waiting = Pattern::record(
            dataspace_core::values::OBSERVE,
            vec![Pattern::record(crate::protocol::ORDER_RESULT, vec![Pattern::lit(order), Pattern::Wildcard])],
        );
        let check = waiting.clone();
        ctx.on_retracted(waiting, move |ctx, _| {
            if !ctx.view().iter().any(|v| check.is_match(v)) {
                ctx.stop(&root);
            }
        });
    }
}
