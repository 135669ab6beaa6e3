//! Driver actors. The timer driver turns `(set-timer id delay)` requests
//! into `(timer-expired id)` assertions.

use log::warn;

use crate::dataspace::{ActorId, Dataspace};
use crate::facets::{Ctx, FacetActor};
use crate::forms::during;
use crate::rec;
use crate::values::{Pattern, Value};

pub const SET_TIMER: &str = "set-timer";
pub const TIMER_EXPIRED: &str = "timer-expired";
const TIMER_DUE: &str = "timer-due";

/// Request pattern `(set-timer $id $delay)`.
pub fn timer_request_pattern() -> Pattern {
    Pattern::record(SET_TIMER, vec![Pattern::capture("id"), Pattern::capture("delay")])
}

/// Root facet of the timer driver.
pub fn timer_driver(ctx: &mut Ctx<'_, '_>) {
    during(ctx, timer_request_pattern(), |ctx, m| {
        let id = m.at("id").clone();
        let delay = match m.at("delay").as_integer() {
            Some(d) if d > 0 => d as u64,
            _ => {
                warn!("ignoring timer request {}: delay must be a positive integer", m.value);
                return;
            }
        };
        let fired = ctx.field(false);
        let wakeup = ctx.schedule_wakeup(delay, rec!(TIMER_DUE, &id));
        ctx.on_stop(move |ctx| ctx.cancel_wakeup(wakeup));
        ctx.on_message(Pattern::lit(rec!(TIMER_DUE, &id)), move |ctx, _| ctx.set(&fired, true));
        ctx.assert_with(move |ctx| ctx.get(&fired).then(|| rec!(TIMER_EXPIRED, &id)));
    });
}

pub fn spawn_timer_driver(ds: &mut Dataspace) -> ActorId {
    ds.spawn("timer-driver", FacetActor::boxed("timer-driver", timer_driver))
}

/// `(timer-expired id)`.
pub fn timer_expired(id: &Value) -> Value {
    rec!(TIMER_EXPIRED, id)
}
