//! A standalone account-opening bank: one facet per `(create-account client init)`.
//! Not part of the market; it shows fields feeding assertions.

use dataspace_core::dataspace::{ActorId, Dataspace};
use dataspace_core::facets::{Ctx, FacetActor};
use dataspace_core::rec;
use dataspace_core::values::Pattern;

pub const CREATE_ACCOUNT: &str = "create-account";
pub const ACCOUNT_FOR: &str = "account-for";
/// Message `(account-deposit number amount)`.
pub const ACCOUNT_DEPOSIT: &str = "account-deposit";

pub fn account_bank(ctx: &mut Ctx<'_, '_>) {
    let next_account_number = ctx.field(0i64);
    ctx.on_asserted(
        Pattern::record(CREATE_ACCOUNT, vec![Pattern::capture("client"), Pattern::capture("initial")]),
        move |ctx, m| {
            let number = ctx.get(&next_account_number);
            ctx.set(&next_account_number, number + 1);
            let client = m.at("client").clone();
            let initial = m.at("initial").as_integer().unwrap_or(0);
            ctx.react_named(format!("account {number}"), move |ctx| {
                let current_balance = ctx.field(initial);
                ctx.assert_value(rec!(ACCOUNT_FOR, &client, number));
                ctx.assert_dyn(move |ctx| rec!(crate::protocol::BALANCE, number, ctx.get(&current_balance)));
                ctx.on_message(
                    Pattern::record(ACCOUNT_DEPOSIT, vec![Pattern::lit(number), Pattern::capture("amt")]),
                    move |ctx, m| {
                        let amt = m.at("amt").as_integer().unwrap_or(0);
                        ctx.update(&current_balance, |b| *b += amt);
                    },
                );
            });
        },
    );
}

pub fn spawn_account_bank(ds: &mut Dataspace) -> ActorId {
    ds.spawn("account-bank", FacetActor::boxed("account-bank", account_bank))
}
