//! Golden comparisons between the derived forms and their hand expansions.
//!
//! Each check runs a scripted schedule twice, once with the combinator from
//! [`crate::forms`] and once with the same behavior spelled out over the
//! base facet operations, and compares the JSON trace lines.

use std::cell::RefCell;
use std::fmt;
use std::rc::Rc;
use std::str::FromStr;

use crate::dataspace::{behavior, Dataspace, DataspaceConfig, DataspaceError, Event};
use crate::facets::{Ctx, FacetActor, FacetId, Match};
use crate::forms::{during, StateMachine};
use crate::rec;
use crate::values::{message_interest, Pattern, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Form {
    During,
    StateMachine,
}

impl FromStr for Form {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "during" => Ok(Form::During),
            "state-machine" => Ok(Form::StateMachine),
            other => Err(format!("unknown form `{other}` (expected during or state-machine)")),
        }
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Form::During => "during",
            Form::StateMachine => "state-machine",
        })
    }
}

/// Outcome of one schedule: both traces, line by line.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub schedule: String,
    pub derived: Vec<String>,
    pub expanded: Vec<String>,
}

impl Comparison {
    pub fn identical(&self) -> bool {
        self.derived == self.expanded
    }

    /// Both traces as JSONL text.
    pub fn files(&self) -> (String, String) {
        (join_lines(&self.derived), join_lines(&self.expanded))
    }

    /// First differing line, 1-based.
    pub fn first_difference(&self) -> Option<usize> {
        let n = self.derived.len().max(self.expanded.len());
        (0..n).find(|&i| self.derived.get(i) != self.expanded.get(i)).map(|i| i + 1)
    }
}

fn join_lines(lines: &[String]) -> String {
    let mut s = String::new();
    for l in lines {
        s.push_str(l);
        s.push('\n');
    }
    s
}

/// Run every schedule for `form`.
pub fn check(form: Form) -> Result<Vec<Comparison>, DataspaceError> {
    let schedules = match form {
        Form::During => during_schedules(),
        Form::StateMachine => machine_schedules(),
    };
    schedules
        .into_iter()
        .map(|(name, steps)| {
            let (derived, expanded) = match form {
                Form::During => (
                    run_schedule(&steps, |ctx| during_subject(ctx, false))?,
                    run_schedule(&steps, |ctx| during_subject(ctx, true))?,
                ),
                Form::StateMachine => (
                    run_schedule(&steps, |ctx| machine_subject(ctx, false))?,
                    run_schedule(&steps, |ctx| machine_subject(ctx, true))?,
                ),
            };
            Ok(Comparison { schedule: name.to_owned(), derived, expanded })
        })
        .collect()
}

fn run_schedule(
    steps: &[Value],
    subject: impl FnOnce(&mut Ctx<'_, '_>) + 'static,
) -> Result<Vec<String>, DataspaceError> {
    let mut ds = Dataspace::new(DataspaceConfig { seed: 7, ..DataspaceConfig::default() });
    ds.spawn("env", environment());
    ds.spawn("subject", FacetActor::boxed("subject", subject));
    ds.run_until_quiescent(1000)?;
    for step in steps {
        ds.inject_message(step.clone());
        ds.run_until_quiescent(1000)?;
    }
    Ok(ds.trace().iter().map(|r| r.to_json_line()).collect())
}

/// Asserts and retracts `(item x)` on command: `(add x)`, `(drop x)`, `(swap x y)`.
fn environment() -> Box<dyn crate::dataspace::Behavior> {
    behavior(|event, env| {
        match event {
            Event::Boot => {
                for label in ["add", "drop"] {
                    env.assert(message_interest(&Pattern::record(label, vec![Pattern::Wildcard])));
                }
                env.assert(message_interest(&Pattern::record("swap", vec![Pattern::Wildcard, Pattern::Wildcard])));
            }
            Event::Message(v) => match v.as_record() {
                Some(("add", [x])) => env.assert(rec!("item", x)),
                Some(("drop", [x])) => env.retract(rec!("item", x)),
                Some(("swap", [x, y])) => {
                    env.retract(rec!("item", x));
                    env.assert(rec!("item", y));
                }
                _ => {}
            },
            _ => {}
        }
        Ok(())
    })
}

fn item_pattern() -> Pattern {
    Pattern::record("item", vec![Pattern::capture("x")])
}

fn during_body(ctx: &mut Ctx<'_, '_>, m: &Match) {
    let x = m.at("x").clone();
    let hits = ctx.field(0i64);
    ctx.assert_dyn({
        let x = x.clone();
        move |ctx| rec!("seen", &x, ctx.get(&hits))
    });
    ctx.on_message(Pattern::lit(rec!("poke", &x)), move |ctx, _| ctx.update(&hits, |h| *h += 1));
    ctx.on_stop(move |ctx| ctx.send(rec!("gone", &x)));
}

fn during_subject(ctx: &mut Ctx<'_, '_>, expanded: bool) {
    if !expanded {
        during(ctx, item_pattern(), during_body);
        return;
    }
    // on (asserted p) => react { me = current facet; on (retracted p') stop me; body }
    let p = item_pattern();
    ctx.on_asserted(p.clone(), move |ctx, m| {
        let gone = p.instantiate(&m.bindings).expect("bound");
        let m = m.clone();
        ctx.react(move |ctx| {
            let me = ctx.facet_id();
            ctx.on_retracted(gone, move |ctx, _| ctx.stop(&me));
            during_body(ctx, &m);
        });
    });
}

fn during_schedules() -> Vec<(&'static str, Vec<Value>)> {
    let add = |x: &str| rec!("add", x);
    let drop = |x: &str| rec!("drop", x);
    let poke = |x: &str| rec!("poke", x);
    vec![
        ("two-items", vec![add("a"), add("b"), poke("a"), drop("a"), poke("b"), drop("b")]),
        ("reappear", vec![add("a"), poke("a"), poke("a"), drop("a"), add("a"), poke("a"), drop("a")]),
        ("swap", vec![add("a"), rec!("swap", "a", "b"), poke("b"), rec!("swap", "b", "a"), add("c"), drop("a")]),
    ]
}

type GotoFn = Rc<dyn Fn(&mut Ctx<'_, '_>, &str, Vec<Value>)>;

fn warmup_state(ctx: &mut Ctx<'_, '_>, goto: GotoFn) {
    ctx.assert_value(rec!("warming-up"));
    ctx.on_start(move |ctx| goto(ctx, "idle", vec![]));
}

fn idle_state(ctx: &mut Ctx<'_, '_>, goto: GotoFn) {
    ctx.assert_value(rec!("idle"));
    ctx.on_message(Pattern::record("go-busy", vec![Pattern::capture("n")]), move |ctx, m| {
        goto(ctx, "busy", vec![m.at("n").clone()]);
    });
    ctx.on_stop(|ctx| ctx.send(rec!("left", "idle")));
}

fn busy_state(ctx: &mut Ctx<'_, '_>, goto: GotoFn, args: &[Value]) {
    let n = args[0].clone();
    let ticks = ctx.field(0i64);
    ctx.assert_dyn({
        let n = n.clone();
        move |ctx| rec!("busy", &n, ctx.get(&ticks))
    });
    ctx.on_message(Pattern::lit(rec!("tick")), move |ctx, _| ctx.update(&ticks, |t| *t += 1));
    let again = goto.clone();
    ctx.on_message(Pattern::record("go-busy", vec![Pattern::capture("n")]), move |ctx, m| {
        again(ctx, "busy", vec![m.at("n").clone()]);
    });
    ctx.on_message(Pattern::lit(rec!("finish")), move |ctx, _| goto(ctx, "idle", vec![]));
    ctx.on_stop(move |ctx| ctx.send(rec!("left", "busy", &n)));
}

fn machine_subject(ctx: &mut Ctx<'_, '_>, expanded: bool) {
    if !expanded {
        let wrap = |g: &crate::forms::Goto| -> GotoFn {
            let g = g.clone();
            Rc::new(move |ctx: &mut Ctx<'_, '_>, label: &str, args| g.goto(ctx, label, args))
        };
        StateMachine::new("worker")
            .state("warmup", move |ctx, g| warmup_state(ctx, wrap(g)))
            .state("idle", move |ctx, g| idle_state(ctx, wrap(g)))
            .state_with("busy", &["n"], move |ctx, g, args| busy_state(ctx, wrap(g), args))
            .start(ctx);
        return;
    }
    let id: Rc<RefCell<Option<FacetId>>> = Rc::new(RefCell::new(None));
    hand_run_state(ctx, id, "warmup".to_owned(), vec![]);
}

// (define (run-state state args) (react (set! id (current-facet-id)) (match state ...)))
fn hand_run_state(ctx: &mut Ctx<'_, '_>, id: Rc<RefCell<Option<FacetId>>>, state: String, args: Vec<Value>) {
    ctx.react(move |ctx| {
        *id.borrow_mut() = Some(ctx.facet_id());
        let goto = hand_goto(id.clone());
        match state.as_str() {
            "warmup" => warmup_state(ctx, goto),
            "idle" => idle_state(ctx, goto),
            "busy" => busy_state(ctx, goto, &args),
            other => unreachable!("no state {other}"),
        }
    });
}

// (define (goto name label . args) (stop id (run-state label args)))
fn hand_goto(id: Rc<RefCell<Option<FacetId>>>) -> GotoFn {
    Rc::new(move |ctx: &mut Ctx<'_, '_>, label: &str, args| {
        let current = id.borrow().clone().expect("machine started");
        let (id, label) = (id.clone(), label.to_owned());
        ctx.stop_then(&current, move |ctx| hand_run_state(ctx, id, label, args));
    })
}

fn machine_schedules() -> Vec<(&'static str, Vec<Value>)> {
    let busy = |n: i64| rec!("go-busy", n);
    let tick = || rec!("tick");
    let finish = || rec!("finish");
    vec![
        ("linear", vec![busy(1), tick(), finish(), busy(2), finish()]),
        ("cycle", vec![busy(1), tick(), busy(2), tick(), tick(), busy(3), finish()]),
        ("ignored", vec![finish(), tick(), busy(5), finish(), finish(), busy(6)]),
    ]
}
