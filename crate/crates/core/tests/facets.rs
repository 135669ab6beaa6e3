use std::cell::RefCell;
use std::rc::Rc;

use dataspace_core::dataspace::{behavior, ActorId, Dataspace, Event};
use dataspace_core::facets::{Ctx, FacetActor, FacetError, FacetId, Field};
use dataspace_core::forms::during;
use dataspace_core::rec;
use dataspace_core::values::{message_interest, Pattern, Value};

type Log = Rc<RefCell<Vec<String>>>;

/// `(add x)` asserts `(item x)`, `(drop x)` retracts it.
fn toggler(ds: &mut Dataspace) -> ActorId {
    ds.spawn(
        "toggler",
        behavior(|event, env| {
            match event {
                Event::Boot => {
                    env.assert(message_interest(&Pattern::record("add", vec![Pattern::Wildcard])));
                    env.assert(message_interest(&Pattern::record("drop", vec![Pattern::Wildcard])));
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

fn facet_actor(ds: &mut Dataspace, boot: impl FnOnce(&mut Ctx<'_, '_>) + 'static) -> ActorId {
    ds.spawn("subject", FacetActor::boxed("subject", boot))
}

fn step(ds: &mut Dataspace, msg: Value) {
    ds.inject_message(msg);
    ds.run_until_quiescent(200).unwrap();
}

fn item_pattern() -> Pattern {
    Pattern::record("item", vec![Pattern::capture("x")])
}

fn subject(ds: &Dataspace, id: ActorId) -> &FacetActor {
    ds.behavior::<FacetActor>(id).expect("facet actor")
}

fn coherent(ds: &Dataspace, id: ActorId) {
    assert_eq!(subject(ds, id).contributions(), ds.contributions(id), "{}", subject(ds, id).render_tree());
}

#[test]
fn bag_contributions_mirror_the_tree() {
    let mut ds = Dataspace::default();
    toggler(&mut ds);
    let id = facet_actor(&mut ds, |ctx| {
        ctx.assert_value(rec!("ready"));
        during(ctx, item_pattern(), |ctx, m| {
            let x = m.at("x").clone();
            let n = ctx.field(0i64);
            ctx.assert_dyn(move |ctx| rec!("holding", &x, ctx.get(&n)));
            ctx.on_message(Pattern::lit(rec!("bump")), move |ctx, _| ctx.update(&n, |n| *n += 1));
            ctx.react(|ctx| {
                ctx.assert_value(rec!("nested"));
            });
        });
    });
    ds.run_until_quiescent(50).unwrap();
    coherent(&ds, id);
    for msg in [rec!("add", "a"), rec!("add", "b"), rec!("bump"), rec!("drop", "a"), rec!("bump"), rec!("drop", "b")] {
        step(&mut ds, msg);
        coherent(&ds, id);
    }
    // The value asserted twice by two nested facets counts twice.
    step(&mut ds, rec!("add", "c"));
    step(&mut ds, rec!("add", "d"));
    assert_eq!(ds.contributions(id).get(&rec!("nested")), Some(&2));
    coherent(&ds, id);
}

type Shared<T> = Rc<RefCell<T>>;

#[test]
fn stop_removes_subtree_fields_and_contributions() {
    let mut ds = Dataspace::default();
    let log: Log = Rc::default();
    let kept: Shared<Option<(FacetId, Field<i64>)>> = Rc::default();
    let (l, k) = (log.clone(), kept.clone());
    let id = facet_actor(&mut ds, move |ctx| {
        let l2 = l.clone();
        let k1 = k.clone();
        let target = ctx.react_named("target", move |ctx| {
            let f = ctx.field(7i64);
            *k1.borrow_mut() = Some((ctx.facet_id(), f));
            ctx.assert_value(rec!("outer"));
            let l3 = l2.clone();
            ctx.on_stop(move |_| l3.borrow_mut().push("target".into()));
            let l4 = l2.clone();
            ctx.react(move |ctx| {
                ctx.assert_value(rec!("inner"));
                ctx.on_message(Pattern::lit(rec!("never")), |_, _| {});
                ctx.on_stop(move |_| l4.borrow_mut().push("child".into()));
            });
        });
        let kept = k.clone();
        let l5 = l.clone();
        ctx.on_message(Pattern::lit(rec!("stop")), move |ctx, _| {
            ctx.stop(&target);
            let (_, f) = kept.borrow().clone().unwrap();
            l5.borrow_mut().push(format!("{:?}", ctx.try_get(&f)));
        });
    });
    ds.run_until_quiescent(50).unwrap();
    assert!(ds.bag().is_present(&rec!("inner")));
    step(&mut ds, rec!("stop"));
    let (target, field) = kept.borrow().clone().unwrap();
    assert_eq!(
        *log.borrow(),
        vec![
            "child".to_owned(),
            "target".to_owned(),
            format!("{:?}", Err::<i64, _>(FacetError::DeadFieldAccess(field.id())))
        ]
    );
    assert!(subject(&ds, id).live_facets().iter().all(|f| !f.is_within(&target)));
    assert!(!ds.bag().is_present(&rec!("outer")) && !ds.bag().is_present(&rec!("inner")));
    coherent(&ds, id);
    // Only the root remains, so the actor is still alive.
    assert!(ds.is_alive(id));
    let turn = ds.trace().last().unwrap();
    assert_eq!(turn.actions.len(), 3, "one batch of retractions: {:?}", turn.actions);
}

#[test]
fn stop_continuation_runs_after_teardown_under_the_parent() {
    let mut ds = Dataspace::default();
    let parent_seen: Rc<RefCell<Option<String>>> = Rc::default();
    let seen = parent_seen.clone();
    facet_actor(&mut ds, move |ctx| {
        let root = ctx.facet_id();
        let order = ctx.react(|ctx| {
            ctx.assert_value(rec!("order-context"));
        });
        ctx.on_message(Pattern::lit(rec!("done")), move |ctx, _| {
            let seen = seen.clone();
            let root = root.clone();
            ctx.stop_then(&order, move |ctx| {
                *seen.borrow_mut() = Some(format!("{} {}", ctx.facet_id(), ctx.facet_id() == root));
                ctx.spawn_facets("cache", |ctx| {
                    ctx.assert_value(rec!("order-result", "fulfilled"));
                });
            });
        });
    });
    ds.run_until_quiescent(50).unwrap();
    step(&mut ds, rec!("done"));
    assert_eq!(parent_seen.borrow().as_deref(), Some("0 true"));
    let turn = ds.trace().iter().rev().find(|r| r.event.to_string() == "(message (done))").unwrap();
    let rendered: Vec<String> = turn.actions.iter().map(|a| a.to_string()).collect();
    assert_eq!(rendered, vec!["(retract (order-context))", "(spawn \"cache\")"]);
    assert!(ds.bag().is_present(&rec!("order-result", "fulfilled")));
}

#[test]
fn stopping_the_root_then_reacting_grafts_a_new_root() {
    let mut ds = Dataspace::default();
    let id = facet_actor(&mut ds, |ctx| {
        let root = ctx.facet_id();
        ctx.on_message(Pattern::lit(rec!("restart")), move |ctx, _| {
            ctx.stop_then(&root, |ctx| {
                ctx.react(|ctx| {
                    ctx.assert_value(rec!("second-life"));
                });
            });
        });
    });
    ds.run_until_quiescent(50).unwrap();
    step(&mut ds, rec!("restart"));
    assert!(ds.is_alive(id));
    assert_eq!(subject(&ds, id).live_facets().iter().map(|f| f.to_string()).collect::<Vec<_>>(), vec!["1"]);
    assert!(ds.bag().is_present(&rec!("second-life")));
}

#[test]
fn actor_quits_when_its_last_facet_stops() {
    let mut ds = Dataspace::default();
    let id = facet_actor(&mut ds, |ctx| {
        ctx.assert_value(rec!("here"));
        ctx.on_message(Pattern::lit(rec!("leave")), |ctx, _| ctx.stop_current());
    });
    ds.run_until_quiescent(50).unwrap();
    step(&mut ds, rec!("leave"));
    assert!(!ds.is_alive(id));
    assert!(ds.query(&Pattern::Wildcard).is_empty());
    assert_eq!(ds.actor_stats(id).unwrap().stop_handlers_run, 0);
}

#[test]
fn handlers_run_in_tree_preorder_then_registration_order() {
    let mut ds = Dataspace::default();
    toggler(&mut ds);
    let log: Log = Rc::default();
    let l = log.clone();
    facet_actor(&mut ds, move |ctx| {
        let (a, b, c, d) = (l.clone(), l.clone(), l.clone(), l.clone());
        ctx.react(move |ctx| {
            let a2 = a.clone();
            ctx.react(move |ctx| {
                ctx.on_asserted(item_pattern(), move |_, m| a2.borrow_mut().push(format!("grandchild {}", m.at("x"))));
            });
            ctx.on_asserted(item_pattern(), move |_, m| a.borrow_mut().push(format!("child {}", m.at("x"))));
        });
        ctx.on_asserted(item_pattern(), move |_, m| b.borrow_mut().push(format!("root-1 {}", m.at("x"))));
        ctx.on_asserted(Pattern::record("item", vec![Pattern::Wildcard]), move |_, m| {
            c.borrow_mut().push(format!("root-2 {}", m.value))
        });
        ctx.react(move |ctx| {
            ctx.on_asserted(item_pattern(), move |_, m| d.borrow_mut().push(format!("second {}", m.at("x"))));
        });
    });
    ds.run_until_quiescent(50).unwrap();
    step(&mut ds, rec!("add", "a"));
    assert_eq!(*log.borrow(), vec!["root-1 a", "root-2 (item a)", "child a", "grandchild a", "second a"]);
}

#[test]
fn handler_stopping_its_facet_skips_siblings() {
    let mut ds = Dataspace::default();
    toggler(&mut ds);
    let log: Log = Rc::default();
    let l = log.clone();
    facet_actor(&mut ds, move |ctx| {
        let (l1, l2) = (l.clone(), l.clone());
        ctx.react(move |ctx| {
            ctx.on_asserted(item_pattern(), move |ctx, _| {
                l1.borrow_mut().push("first".into());
                ctx.stop_current();
            });
            ctx.on_asserted(item_pattern(), move |_, _| l2.borrow_mut().push("second".into()));
        });
        ctx.assert_value(rec!("root-alive"));
    });
    ds.run_until_quiescent(50).unwrap();
    step(&mut ds, rec!("add", "a"));
    assert_eq!(*log.borrow(), vec!["first"]);
}

#[test]
fn dependent_assertion_recomputes_once_per_body() {
    let mut ds = Dataspace::default();
    let id = facet_actor(&mut ds, |ctx| {
        let a = ctx.field(1i64);
        let b = ctx.field(2i64);
        ctx.assert_dyn(move |ctx| rec!("sum", ctx.get(&a) + ctx.get(&b)));
        ctx.on_message(Pattern::lit(rec!("both")), move |ctx, _| {
            ctx.set(&a, 10);
            ctx.set(&b, 20);
        });
        ctx.on_message(Pattern::lit(rec!("same")), move |ctx, _| ctx.set(&a, 10));
        ctx.assert_value(rec!("constant"));
    });
    ds.run_until_quiescent(50).unwrap();
    let base = subject(&ds, id).recomputations();
    step(&mut ds, rec!("both"));
    assert_eq!(subject(&ds, id).recomputations(), base + 1);
    let actions: Vec<String> = ds.trace().last().unwrap().actions.iter().map(|a| a.to_string()).collect();
    assert_eq!(actions, vec!["(retract (sum 3))", "(assert (sum 30))"]);
    step(&mut ds, rec!("same"));
    assert_eq!(subject(&ds, id).recomputations(), base + 2);
    assert!(ds.trace().last().unwrap().actions.is_empty());
}

#[test]
fn dead_field_access_crashes_the_actor() {
    let mut ds = Dataspace::default();
    let id = facet_actor(&mut ds, |ctx| {
        let stash: Rc<RefCell<Option<Field<i64>>>> = Rc::default();
        let s = stash.clone();
        let child = ctx.react(move |ctx| {
            *s.borrow_mut() = Some(ctx.field(1));
        });
        ctx.assert_value(rec!("alive"));
        ctx.on_message(Pattern::lit(rec!("poke")), move |ctx, _| {
            ctx.stop(&child);
            let f = stash.borrow().unwrap();
            ctx.get(&f);
        });
    });
    ds.run_until_quiescent(50).unwrap();
    step(&mut ds, rec!("poke"));
    let stats = ds.actor_stats(id).unwrap();
    assert!(stats.crashed);
    assert!(stats.crash_reason.as_deref().unwrap_or("").contains("stopped facet"), "{:?}", stats.crash_reason);
    assert!(ds.query(&Pattern::Wildcard).is_empty());
}

#[test]
fn crash_skips_stop_handlers() {
    let mut ds = Dataspace::default();
    let ran: Rc<RefCell<u32>> = Rc::default();
    let r = ran.clone();
    let id = facet_actor(&mut ds, move |ctx| {
        let r2 = r.clone();
        ctx.on_stop(move |_| *r2.borrow_mut() += 1);
        ctx.react(move |ctx| {
            ctx.assert_value(rec!("mine"));
            ctx.on_stop(move |_| *r.borrow_mut() += 1);
        });
        ctx.on_message(Pattern::lit(rec!("explode")), |_, _| panic!("kaboom"));
    });
    ds.run_until_quiescent(50).unwrap();
    step(&mut ds, rec!("explode"));
    assert_eq!(*ran.borrow(), 0);
    let stats = ds.actor_stats(id).unwrap();
    assert!(stats.crashed);
    assert_eq!(stats.stop_handlers_on_crash, 0);
    assert!(ds.contributions(id).is_empty());
}

#[test]
fn start_handlers_run_before_events_and_may_nest() {
    let mut ds = Dataspace::default();
    let log: Log = Rc::default();
    let l = log.clone();
    let id = facet_actor(&mut ds, move |ctx| {
        let l2 = l.clone();
        ctx.on_start(move |ctx| {
            l2.borrow_mut().push(format!("start {}", ctx.facet_id()));
            ctx.react(|ctx| {
                ctx.assert_value(rec!("grandchild"));
            });
            ctx.send(rec!("started"));
        });
        ctx.on_message(Pattern::lit(rec!("started")), move |_, _| l.borrow_mut().push("heard".into()));
    });
    ds.run_until_quiescent(50).unwrap();
    assert_eq!(*log.borrow(), vec!["start 0", "heard"]);
    assert_eq!(subject(&ds, id).live_facets().len(), 2);
    let boot: Vec<String> = ds.trace()[0].actions.iter().map(|a| a.to_string()).collect();
    assert_eq!(boot.last().unwrap(), "(message (started))");
}

#[test]
fn facet_ids_name_the_running_facet() {
    let mut ds = Dataspace::default();
    let log: Log = Rc::default();
    let l = log.clone();
    facet_actor(&mut ds, move |ctx| {
        l.borrow_mut().push(ctx.facet_id().to_string());
        let l2 = l.clone();
        ctx.react(move |ctx| {
            l2.borrow_mut().push(ctx.facet_id().to_string());
            ctx.react(move |ctx| l2.borrow_mut().push(ctx.facet_id().to_string()));
        });
        ctx.react(move |ctx| l.borrow_mut().push(ctx.facet_id().to_string()));
    });
    ds.run_until_quiescent(50).unwrap();
    assert_eq!(*log.borrow(), vec!["0", "0.0", "0.0.0", "0.1"]);
}

#[test]
fn new_asserted_handler_sees_already_visible_values() {
    let mut ds = Dataspace::default();
    toggler(&mut ds);
    let log: Log = Rc::default();
    let l = log.clone();
    facet_actor(&mut ds, move |ctx| {
        let l2 = l.clone();
        ctx.on_asserted(Pattern::lit(rec!("item", "a")), move |ctx, _| {
            let l3 = l2.clone();
            ctx.react(move |ctx| {
                ctx.on_asserted(item_pattern(), move |_, m| l3.borrow_mut().push(format!("late {}", m.at("x"))));
            });
        });
        ctx.on_asserted(item_pattern(), move |_, m| l.borrow_mut().push(format!("early {}", m.at("x"))));
    });
    ds.run_until_quiescent(50).unwrap();
    step(&mut ds, rec!("add", "b"));
    step(&mut ds, rec!("add", "a"));
    assert_eq!(*log.borrow(), vec!["early b", "early a", "late a", "late b"]);
}

#[test]
fn tree_rendering_follows_depth() {
    let mut ds = Dataspace::default();
    toggler(&mut ds);
    let id = facet_actor(&mut ds, |ctx| {
        during(ctx, Pattern::lit(rec!("item", "open")), |ctx, _| {
            ctx.assert_value(rec!("price", 40));
            during(ctx, item_pattern(), |ctx, m| {
                ctx.assert_value(rec!("seen", m.at("x")));
            });
        });
    });
    ds.run_until_quiescent(50).unwrap();
    step(&mut ds, rec!("add", "open"));
    let expected = "\
facet 0 subject
  on asserted (item open)
  facet 0.0 during (item open)
    on retracted (item open)
    assert (price 40)
    on asserted (item $x)
    facet 0.0.0 during (item $x)
      on retracted (item open)
      assert (seen open)
";
    assert_eq!(subject(&ds, id).render_tree(), expected);
    step(&mut ds, rec!("drop", "open"));
    assert_eq!(subject(&ds, id).render_tree(), "facet 0 subject\n  on asserted (item open)\n");
}
