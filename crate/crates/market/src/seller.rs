//! Sellers: advertise a price and answer purchase requests while trading is open.

use dataspace_core::dataspace::{ActorId, Dataspace};
use dataspace_core::facets::{Ctx, FacetActor};
use dataspace_core::forms::during;
use dataspace_core::rec;
use dataspace_core::values::{Pattern, Value};

use crate::protocol::{trading_day_open, PRICE, PURCHASE_REQUEST, PURCHASE_RESULT};

/// Message that makes the named seller leave the market.
pub const SELLER_LEAVE: &str = "seller-leave";

/// Anonymous seller: `(price p)` and `(purchase-result id ok)`.
pub fn seller(ctx: &mut Ctx<'_, '_>, desired: i64) {
    during(ctx, Pattern::lit(trading_day_open()), move |ctx, _| {
        ctx.assert_value(rec!(PRICE, desired));
        during(
            ctx,
            Pattern::record(
                PURCHASE_REQUEST,
                vec![Pattern::capture("id"), Pattern::capture("count"), Pattern::capture("offered")],
            ),
            move |ctx, m| {
                let ok = m.at("offered").as_integer().is_some_and(|o| o >= desired);
                ctx.assert_value(rec!(PURCHASE_RESULT, m.at("id"), ok));
            },
        );
    });
}

/// Named seller: `(price name p)` and `(purchase-result id name ok)`.
pub fn named_seller(ctx: &mut Ctx<'_, '_>, name: Value, desired: i64) {
    during(ctx, Pattern::lit(trading_day_open()), move |ctx, _| {
        ctx.assert_value(rec!(PRICE, &name, desired));
        let name = name.clone();
        during(
            ctx,
            Pattern::record(
                PURCHASE_REQUEST,
                vec![
                    Pattern::capture("id"),
                    Pattern::lit(name.clone()),
                    Pattern::capture("count"),
                    Pattern::capture("offered"),
                ],
            ),
            move |ctx, m| {
                let ok = m.at("offered").as_integer().is_some_and(|o| o >= desired);
                ctx.assert_value(rec!(PURCHASE_RESULT, m.at("id"), &name, ok));
            },
        );
    });
}

/// Advertises `(price name p)` but never answers a purchase.
pub fn advert_only(ctx: &mut Ctx<'_, '_>, name: Value, desired: i64) {
    during(ctx, Pattern::lit(trading_day_open()), move |ctx, _| {
        ctx.assert_value(rec!(PRICE, &name, desired));
    });
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SellerKind {
    Anonymous,
    Named,
    AdvertOnly,
}

/// Spawn a seller that also leaves on `(seller-leave name)`.
pub fn spawn_seller(ds: &mut Dataspace, kind: SellerKind, name: &Value, desired: i64) -> ActorId {
    let label = format!("seller {name}");
    ds.spawn(label.clone(), FacetActor::boxed(label, seller_boot(kind, name.clone(), desired)))
}

pub fn seller_boot(kind: SellerKind, name: Value, desired: i64) -> impl FnOnce(&mut Ctx<'_, '_>) + 'static {
    move |ctx| {
        let root = ctx.facet_id();
        ctx.on_message(Pattern::lit(rec!(SELLER_LEAVE, &name)), move |ctx, _| ctx.stop(&root));
        match kind {
            SellerKind::Anonymous => seller(ctx, desired),
            SellerKind::Named => named_seller(ctx, name, desired),
            SellerKind::AdvertOnly => advert_only(ctx, name, desired),
        }
    }
}
