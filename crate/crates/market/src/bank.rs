//! The bank: accounts, withdrawals and deposits while trading is open.

use std::collections::BTreeMap;

use dataspace_core::dataspace::{ActorId, Dataspace};
use dataspace_core::facets::{Ctx, FacetActor, Field};
use dataspace_core::forms::during;
use dataspace_core::values::{Pattern, Value};

use crate::protocol::{balance, bank_response, trading_day_open, DEPOSIT_FUNDS, WITHDRAW_FUNDS};

fn request(label: &str) -> Pattern {
    Pattern::record(label, vec![Pattern::capture("id"), Pattern::capture("acct"), Pattern::capture("amt")])
}

pub fn bank(ctx: &mut Ctx<'_, '_>, accounts: BTreeMap<Value, i64>) {
    let names: Vec<Value> = accounts.keys().cloned().collect();
    let balances: Field<BTreeMap<Value, i64>> = ctx.field(accounts);
    // Answers already given, so a request seen again on a later day is not applied twice.
    let answered: Field<BTreeMap<Value, bool>> = ctx.field(BTreeMap::new());
    for acct in names {
        ctx.assert_with(move |ctx| ctx.with(&balances, |b| b.get(&acct).map(|n| balance(&acct, *n))));
    }
    during(ctx, Pattern::lit(trading_day_open()), move |ctx, _| {
        during(ctx, request(WITHDRAW_FUNDS), move |ctx, m| {
            let ok = settle(ctx, balances, answered, m, |bal, amt| (bal >= amt).then(|| bal - amt));
            ctx.assert_value(bank_response(m.at("id"), ok));
        });
        during(ctx, request(DEPOSIT_FUNDS), move |ctx, m| {
            let ok = settle(ctx, balances, answered, m, |bal, amt| Some(bal + amt));
            ctx.assert_value(bank_response(m.at("id"), ok));
        });
    });
}

/// Apply `step` to the account once per request id; later sightings get the same answer.
fn settle(
    ctx: &mut Ctx<'_, '_>,
    balances: Field<BTreeMap<Value, i64>>,
    answered: Field<BTreeMap<Value, bool>>,
    m: &dataspace_core::facets::Match,
    step: impl Fn(i64, i64) -> Option<i64>,
) -> bool {
    let id = m.at("id").clone();
    if let Some(ok) = ctx.with(&answered, |a| a.get(&id).copied()) {
        return ok;
    }
    let acct = m.at("acct");
    let next = match (m.at("amt").as_integer(), ctx.with(&balances, |b| b.get(acct).copied())) {
        (Some(amt), Some(bal)) if amt >= 0 => step(bal, amt),
        _ => None,
    };
    if let Some(n) = next {
        ctx.update(&balances, |b| b.insert(acct.clone(), n));
    }
    ctx.update(&answered, |a| a.insert(id, next.is_some()));
    next.is_some()
}

pub fn spawn_bank(ds: &mut Dataspace, accounts: BTreeMap<Value, i64>) -> ActorId {
    ds.spawn("bank", FacetActor::boxed("bank", move |ctx| bank(ctx, accounts)))
}

/// Balances published as `(balance acct n)`.
pub fn published_balances(ds: &Dataspace) -> BTreeMap<Value, i64> {
    let p = Pattern::record(crate::protocol::BALANCE, vec![Pattern::capture("a"), Pattern::capture("n")]);
    ds.query(&p)
        .iter()
        .filter_map(|v| {
            let b = p.matches(v)?;
            Some((b.at("a").clone(), b.at("n").as_integer()?))
        })
        .collect()
}
