//! Derived forms: `during`, `stop_when`, state machines, query maps, timeouts.
//!
//! Each is an ordinary function over [`Ctx`] that installs the same
//! endpoints a hand-written version would, in the same order.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::rc::Rc;

use log::warn;

use crate::facets::{fail, Ctx, EndpointId, FacetError, FacetId, Field, Match, Trigger};
use crate::rec;
use crate::values::{Pattern, Value};

/// One child facet per distinct assertion matching `p`, alive while it is.
pub fn during(ctx: &mut Ctx<'_, '_>, p: Pattern, body: impl Fn(&mut Ctx<'_, '_>, &Match) + 'static) -> EndpointId {
    let label = format!("during {p}");
    let body = Rc::new(body);
    let has_wildcard = p.has_wildcard();
    ctx.on_asserted(p.clone(), move |ctx, m| {
        let gone = if has_wildcard {
            Pattern::Literal(m.value.clone())
        } else {
            p.instantiate(&m.bindings).expect("captures are bound by the match")
        };
        let body = body.clone();
        let m = m.clone();
        ctx.react_named(label.clone(), move |ctx| {
            let me = ctx.facet_id();
            ctx.on_retracted(gone, move |ctx, _| ctx.stop(&me));
            body(ctx, &m);
        });
    })
}

type Continuation = Box<dyn FnOnce(&mut Ctx<'_, '_>)>;

/// Stop the current facet on the first matching event.
pub fn stop_when(ctx: &mut Ctx<'_, '_>, trigger: Trigger, p: Pattern) -> EndpointId {
    install_stop_when(ctx, trigger, p, None)
}

/// Like [`stop_when`], running `cont` under the parent once stopped.
pub fn stop_when_then(
    ctx: &mut Ctx<'_, '_>,
    trigger: Trigger,
    p: Pattern,
    cont: impl FnOnce(&mut Ctx<'_, '_>) + 'static,
) -> EndpointId {
    install_stop_when(ctx, trigger, p, Some(Box::new(cont)))
}

fn install_stop_when(ctx: &mut Ctx<'_, '_>, trigger: Trigger, p: Pattern, cont: Option<Continuation>) -> EndpointId {
    let me = ctx.facet_id();
    let cont = RefCell::new(cont);
    ctx.on(trigger, p, move |ctx, _| match cont.borrow_mut().take() {
        Some(cont) => ctx.stop_then(&me, cont),
        None => ctx.stop(&me),
    })
}

type StateBody = Rc<dyn Fn(&mut Ctx<'_, '_>, &Goto, &[Value])>;

struct StateDef {
    label: String,
    params: Vec<String>,
    body: StateBody,
}

/// Builder for a group of states of which exactly one facet is alive.
pub struct StateMachine {
    name: String,
    states: Vec<StateDef>,
}

impl StateMachine {
    pub fn new(name: impl Into<String>) -> Self {
        StateMachine { name: name.into(), states: Vec::new() }
    }

    /// A state without parameters. The first state added is the initial one.
    pub fn state(self, label: impl Into<String>, body: impl Fn(&mut Ctx<'_, '_>, &Goto) + 'static) -> Self {
        self.state_with(label, &[], move |ctx, goto, _| body(ctx, goto))
    }

    pub fn state_with(
        mut self,
        label: impl Into<String>,
        params: &[&str],
        body: impl Fn(&mut Ctx<'_, '_>, &Goto, &[Value]) + 'static,
    ) -> Self {
        let label = label.into();
        assert!(self.states.iter().all(|s| s.label != label), "state `{label}` declared twice");
        self.states.push(StateDef {
            label,
            params: params.iter().map(|p| (*p).to_owned()).collect(),
            body: Rc::new(body),
        });
        self
    }

    /// Enter the initial state under the current facet.
    pub fn start(self, ctx: &mut Ctx<'_, '_>) -> Goto {
        let first = self.states.first().expect("state machine without states");
        if !first.params.is_empty() {
            fail(FacetError::ArityMismatch { label: first.label.clone(), expected: first.params.len(), got: 0 });
        }
        let goto =
            Goto { inner: Rc::new(Machine { name: self.name, states: self.states, current: RefCell::new(None) }) };
        goto.run_state(ctx, 0, Vec::new());
        goto
    }
}

struct Machine {
    name: String,
    states: Vec<StateDef>,
    current: RefCell<Option<FacetId>>,
}

/// Transition capability of a running state machine.
#[derive(Clone)]
pub struct Goto {
    inner: Rc<Machine>,
}

impl Goto {
    /// Stop the current state's facet and start `label` in its place.
    pub fn goto(&self, ctx: &mut Ctx<'_, '_>, label: &str, args: Vec<Value>) {
        let Some(idx) = self.inner.states.iter().position(|s| s.label == label) else {
            fail(FacetError::UnknownLabel(label.to_owned()));
        };
        let expected = self.inner.states[idx].params.len();
        if expected != args.len() {
            fail(FacetError::ArityMismatch { label: label.to_owned(), expected, got: args.len() });
        }
        let Some(current) = self.inner.current.borrow().clone() else {
            warn!("goto {label} before the machine started");
            return;
        };
        let me = self.clone();
        ctx.stop_then(&current, move |ctx| me.run_state(ctx, idx, args));
    }

    /// Facet of the state currently running.
    pub fn current(&self) -> Option<FacetId> {
        self.inner.current.borrow().clone()
    }

    fn run_state(&self, ctx: &mut Ctx<'_, '_>, idx: usize, args: Vec<Value>) {
        let state = &self.inner.states[idx];
        let label = format!("{}/{}", self.inner.name, state.label);
        let body = state.body.clone();
        let me = self.clone();
        ctx.react_named(label, move |ctx| {
            *me.inner.current.borrow_mut() = Some(ctx.facet_id());
            body(ctx, &me, &args);
        });
    }
}

pub type QueryMapField = Field<BTreeMap<Value, Value>>;

/// A field mapping `key` to `val` for every visible assertion matching `p`.
pub fn query_map(ctx: &mut Ctx<'_, '_>, p: Pattern, key: &str, val: &str) -> QueryMapField {
    let captures: BTreeSet<&str> = p.captures().into_iter().collect();
    assert!(captures.contains(key) && captures.contains(val), "`{key}` and `{val}` must be captures of {p}");
    let map: QueryMapField = ctx.field(BTreeMap::new());
    let arrivals: Field<Vec<(Value, Value, Value)>> = ctx.field(Vec::new());
    let (k, v) = (key.to_owned(), val.to_owned());
    ctx.on_asserted(p.clone(), move |ctx, m| {
        let (key, val) = (m.at(&k).clone(), m.at(&v).clone());
        ctx.update(&arrivals, |list| list.push((m.value.clone(), key.clone(), val.clone())));
        let previous = ctx.update(&map, |map| map.insert(key.clone(), val));
        if previous.is_some() {
            warn!("query map key {key} supplied by more than one assertion; keeping the latest");
        }
    });
    ctx.on_retracted(p, move |ctx, m| {
        ctx.update(&arrivals, |list| list.retain(|(v, _, _)| v != &m.value));
        let rebuilt: BTreeMap<Value, Value> =
            ctx.with(&arrivals, |list| list.iter().map(|(_, k, v)| (k.clone(), v.clone())).collect());
        ctx.set(&map, rebuilt);
    });
    map
}

/// Ask the timer driver for a wakeup and run `body` once when it arrives.
pub fn on_timeout(ctx: &mut Ctx<'_, '_>, delay_ms: i64, body: impl FnOnce(&mut Ctx<'_, '_>) + 'static) -> EndpointId {
    let id = ctx.fresh_unique();
    let body: RefCell<Option<Continuation>> = RefCell::new(Some(Box::new(body)));
    ctx.assert_value(rec!("set-timer", &id, delay_ms));
    ctx.on_asserted(Pattern::lit(rec!("timer-expired", &id)), move |ctx, _| {
        if let Some(body) = body.borrow_mut().take() {
            body(ctx);
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataspace::{behavior, Dataspace, Event};
    use crate::facets::FacetActor;

    fn item(x: &str) -> Pattern {
        Pattern::record("item", vec![Pattern::lit(Value::symbol(x))])
    }

    fn toggler(ds: &mut Dataspace) -> crate::dataspace::ActorId {
        // Asserts (item x) on (message (add x)), retracts on (message (drop x)).
        ds.spawn(
            "env",
            behavior(|event, env| {
                match event {
                    Event::Boot => {
                        env.assert(crate::values::message_interest(&Pattern::Wildcard));
                    }
                    Event::Message(v) => match v.as_record() {
                        Some(("add", [x])) => env.assert(rec!("item", x)),
                        Some(("drop", [x])) => env.retract(rec!("item", x)),
                        _ => {}
                    },
                    _ => {}
                }
                Ok(())
            }),
        )
    }

    #[test]
    fn during_child_lives_with_assertion_and_gets_fresh_fields() {
        let mut ds = Dataspace::default();
        toggler(&mut ds);
        let subject = ds.spawn(
            "subject",
            FacetActor::boxed("subject", |ctx| {
                during(ctx, Pattern::record("item", vec![Pattern::capture("x")]), |ctx, m| {
                    let x = m.at("x").clone();
                    let count = ctx.field(0);
                    ctx.on_message(Pattern::lit(rec!("poke", &x)), move |ctx, _| ctx.update(&count, |n| *n += 1));
                    ctx.assert_dyn(move |ctx| rec!("count", &x, ctx.get(&count)));
                });
            }),
        );
        ds.run_until_quiescent(100).unwrap();
        ds.inject_message(rec!("add", "a"));
        ds.run_until_quiescent(100).unwrap();
        ds.inject_message(rec!("poke", "a"));
        ds.run_until_quiescent(100).unwrap();
        assert!(ds.bag().is_present(&rec!("count", "a", 1)));
        ds.inject_message(rec!("drop", "a"));
        ds.run_until_quiescent(100).unwrap();
        assert!(ds.contributions(subject).keys().all(|v| !v.is_record_labeled("count")));
        ds.inject_message(rec!("add", "a"));
        ds.run_until_quiescent(100).unwrap();
        assert!(ds.bag().is_present(&rec!("count", "a", 0)));
        let tree = ds.behavior::<FacetActor>(subject).unwrap().render_tree();
        assert!(tree.contains("during (item $x)"), "{tree}");
    }

    #[test]
    fn during_without_captures_tracks_presence() {
        let mut ds = Dataspace::default();
        toggler(&mut ds);
        let subject = ds.spawn(
            "subject",
            FacetActor::boxed("subject", |ctx| {
                during(ctx, item("open"), |ctx, _| {
                    ctx.assert_value(rec!("working"));
                });
            }),
        );
        ds.run_until_quiescent(100).unwrap();
        for round in 0..2 {
            ds.inject_message(rec!("add", "open"));
            ds.run_until_quiescent(100).unwrap();
            assert!(ds.bag().is_present(&rec!("working")), "round {round}");
            ds.inject_message(rec!("drop", "open"));
            ds.run_until_quiescent(100).unwrap();
            assert!(!ds.bag().is_present(&rec!("working")));
        }
        assert_eq!(ds.behavior::<FacetActor>(subject).unwrap().live_facets().len(), 1);
    }

    #[test]
    fn two_stop_whens_first_registered_wins() {
        let mut ds = Dataspace::default();
        toggler(&mut ds);
        let log = Rc::new(RefCell::new(Vec::new()));
        let l = log.clone();
        ds.spawn(
            "subject",
            FacetActor::boxed("subject", move |ctx| {
                let (l1, l2) = (l.clone(), l.clone());
                ctx.react(move |ctx| {
                    stop_when_then(ctx, Trigger::Asserted, item("x"), move |_| l1.borrow_mut().push("first"));
                    stop_when_then(ctx, Trigger::Asserted, item("x"), move |_| l2.borrow_mut().push("second"));
                });
            }),
        );
        ds.run_until_quiescent(100).unwrap();
        ds.inject_message(rec!("add", "x"));
        ds.run_until_quiescent(100).unwrap();
        assert_eq!(*log.borrow(), vec!["first"]);
    }

    #[test]
    fn state_machine_replaces_state_facets() {
        let mut ds = Dataspace::default();
        toggler(&mut ds);
        let subject = ds.spawn(
            "subject",
            FacetActor::boxed("subject", |ctx| {
                StateMachine::new("m")
                    .state("idle", |ctx, goto| {
                        ctx.assert_value(rec!("state", "idle"));
                        let goto = goto.clone();
                        ctx.on_asserted(Pattern::record("item", vec![Pattern::capture("x")]), move |ctx, m| {
                            goto.goto(ctx, "busy", vec![m.at("x").clone()])
                        });
                    })
                    .state_with("busy", &["x"], |ctx, goto, args| {
                        ctx.assert_value(rec!("state", "busy", &args[0]));
                        let goto = goto.clone();
                        ctx.on_retracted(Pattern::lit(rec!("item", &args[0])), move |ctx, _| {
                            goto.goto(ctx, "idle", vec![])
                        });
                    })
                    .start(ctx);
            }),
        );
        ds.run_until_quiescent(100).unwrap();
        assert!(ds.bag().is_present(&rec!("state", "idle")));
        ds.inject_message(rec!("add", "a"));
        ds.run_until_quiescent(100).unwrap();
        assert!(ds.bag().is_present(&rec!("state", "busy", "a")));
        assert!(!ds.bag().is_present(&rec!("state", "idle")));
        ds.inject_message(rec!("drop", "a"));
        ds.run_until_quiescent(100).unwrap();
        // Back to idle; the idle handler sees nothing since (item a) is gone.
        assert!(ds.bag().is_present(&rec!("state", "idle")));
        let actor = ds.behavior::<FacetActor>(subject).unwrap();
        assert_eq!(actor.live_facets().len(), 2);
    }

    #[test]
    fn goto_unknown_label_crashes_actor() {
        let mut ds = Dataspace::default();
        let subject = ds.spawn(
            "subject",
            FacetActor::boxed("subject", |ctx| {
                StateMachine::new("m")
                    .state("only", |ctx, goto| {
                        let goto = goto.clone();
                        ctx.on_start(move |ctx| goto.goto(ctx, "nowhere", vec![]));
                    })
                    .start(ctx);
            }),
        );
        ds.run_until_quiescent(100).unwrap();
        let stats = ds.actor_stats(subject).unwrap();
        assert!(stats.crashed);
        assert!(stats.crash_reason.as_deref().unwrap().contains("nowhere"));
        assert!(ds.contributions(subject).is_empty());
    }

    #[test]
    fn goto_arity_is_checked() {
        let mut ds = Dataspace::default();
        let subject = ds.spawn(
            "subject",
            FacetActor::boxed("subject", |ctx| {
                StateMachine::new("m")
                    .state("a", |ctx, goto| {
                        let goto = goto.clone();
                        ctx.on_start(move |ctx| goto.goto(ctx, "b", vec![]));
                    })
                    .state_with("b", &["x"], |_, _, _| {})
                    .start(ctx);
            }),
        );
        ds.run_until_quiescent(100).unwrap();
        assert!(ds.actor_stats(subject).unwrap().crashed);
    }

    #[test]
    fn query_map_follows_the_bag() {
        let mut ds = Dataspace::default();
        let seller = |name: &'static str, price: i64| {
            FacetActor::boxed(name, move |ctx| {
                ctx.assert_value(rec!("price", name, price));
                ctx.on_message(Pattern::lit(rec!("leave", name)), |ctx, _| {
                    let root = ctx.facet_id();
                    ctx.stop(&root)
                });
            })
        };
        ds.spawn("s1", seller("s1", 40));
        ds.spawn("s2", seller("s2", 55));
        let seen = Rc::new(RefCell::new(BTreeMap::new()));
        let out = seen.clone();
        ds.spawn(
            "broker",
            FacetActor::boxed("broker", move |ctx| {
                let sellers = query_map(
                    ctx,
                    Pattern::record("price", vec![Pattern::capture("seller"), Pattern::capture("actual")]),
                    "seller",
                    "actual",
                );
                let out = out.clone();
                ctx.assert_with(move |ctx| {
                    *out.borrow_mut() = ctx.get(&sellers);
                    None
                });
            }),
        );
        ds.run_until_quiescent(100).unwrap();
        let expected: BTreeMap<Value, Value> =
            [(Value::symbol("s1"), Value::Integer(40)), (Value::symbol("s2"), Value::Integer(55))].into();
        assert_eq!(*seen.borrow(), expected);
        ds.inject_message(rec!("leave", "s1"));
        ds.run_until_quiescent(100).unwrap();
        let expected: BTreeMap<Value, Value> = [(Value::symbol("s2"), Value::Integer(55))].into();
        assert_eq!(*seen.borrow(), expected);
    }
}
