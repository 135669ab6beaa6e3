//! The trading-day clock.

use dataspace_core::dataspace::{ActorId, Dataspace};
use dataspace_core::facets::{Ctx, FacetActor};
use dataspace_core::forms::{on_timeout, StateMachine};

use crate::protocol::trading_day_open;

/// Alternate `(trading-day-open)` on for `open_ms`, off for `closed_ms`.
/// A zero `closed_ms` keeps trading open for good.
pub fn clock(ctx: &mut Ctx<'_, '_>, open_ms: u64, closed_ms: u64) {
    if closed_ms == 0 || open_ms == 0 {
        ctx.assert_value(trading_day_open());
        return;
    }
    StateMachine::new("trading-day")
        .state("open", move |ctx, go| {
            ctx.assert_value(trading_day_open());
            let go = go.clone();
            on_timeout(ctx, open_ms as i64, move |ctx| go.goto(ctx, "closed", vec![]));
        })
        .state("closed", move |ctx, go| {
            let go = go.clone();
            on_timeout(ctx, closed_ms as i64, move |ctx| go.goto(ctx, "open", vec![]));
        })
        .start(ctx);
}

pub fn spawn_clock(ds: &mut Dataspace, open_ms: u64, closed_ms: u64) -> ActorId {
    ds.spawn("clock", FacetActor::boxed("clock", move |ctx| clock(ctx, open_ms, closed_ms)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use dataspace_core::drivers::spawn_timer_driver;
    use dataspace_core::values::Pattern;

    fn open(ds: &Dataspace) -> bool {
        !ds.query(&Pattern::lit(trading_day_open())).is_empty()
    }

    #[test]
    fn open_and_closed_periods_alternate() {
        let mut ds = Dataspace::default();
        spawn_timer_driver(&mut ds);
        spawn_clock(&mut ds, 1000, 500);
        ds.run_until_quiescent(100).unwrap();
        assert!(open(&ds));
        ds.advance_virtual_time(999, 100).unwrap();
        assert!(open(&ds));
        ds.advance_virtual_time(1, 100).unwrap();
        assert!(!open(&ds));
        ds.advance_virtual_time(499, 100).unwrap();
        assert!(!open(&ds));
        ds.advance_virtual_time(1, 100).unwrap();
        assert!(open(&ds));
    }

    #[test]
    fn zero_closed_period_stays_open() {
        let mut ds = Dataspace::default();
        spawn_timer_driver(&mut ds);
        spawn_clock(&mut ds, 1000, 0);
        ds.run_until_quiescent(100).unwrap();
        ds.advance_virtual_time(10_000, 100).unwrap();
        assert!(open(&ds));
        assert_eq!(ds.pending_timers(), 0);
    }
}
