use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::{mpsc, Arc, Mutex};
use std::time::{Duration, Instant};

use log::{debug, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::values::{Interest, Pattern, UniqueSource, Value, OBSERVE};

use super::bag::AssertionBag;
use super::event::{Action, Event, Patch, TurnRecord};
use super::{ActorId, Behavior};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DataspaceError {
    #[error("no quiescence after {0} turns")]
    MaxTurnsExceeded(usize),
    #[error("events are still pending")]
    NotQuiescent,
    #[error("operation needs the virtual clock")]
    WallClockMode,
    #[error("operation needs the wall clock")]
    VirtualClockMode,
    #[error("no pending events")]
    Idle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClockMode {
    Virtual,
    Wall,
}

#[derive(Debug, Clone)]
pub struct DataspaceConfig {
    pub seed: u64,
    pub clock: ClockMode,
    /// Keep every [`TurnRecord`] in memory.
    pub record_trace: bool,
}

impl Default for DataspaceConfig {
    fn default() -> Self {
        DataspaceConfig { seed: 0, clock: ClockMode::Virtual, record_trace: true }
    }
}

/// Counters kept per actor.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ActorStats {
    pub name: String,
    pub alive: bool,
    pub turns: u64,
    pub crashed: bool,
    pub crash_reason: Option<String>,
    pub stop_handlers_run: u64,
    /// Stop handlers that ran while the actor was being torn down after a crash.
    pub stop_handlers_on_crash: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WakeupId(pub u64);

enum WakeupOp {
    Schedule(WakeupId, u64, Value),
    Cancel(WakeupId),
}

/// The actor's window onto the dataspace for the duration of one turn.
pub struct TurnEnv<'a> {
    actor: ActorId,
    now: u64,
    actions: Vec<Action>,
    wakeups: Vec<WakeupOp>,
    uniques: &'a mut UniqueSource,
    rng: &'a mut ChaCha8Rng,
    next_wakeup: &'a mut u64,
    stats: &'a mut ActorStats,
}

impl<'a> TurnEnv<'a> {
    pub fn actor(&self) -> ActorId {
        self.actor
    }

    /// Milliseconds on the dataspace clock.
    pub fn now(&self) -> u64 {
        self.now
    }

    pub fn assert(&mut self, v: Value) {
        self.actions.push(Action::Assert(v));
    }

    pub fn retract(&mut self, v: Value) {
        self.actions.push(Action::Retract(v));
    }

    pub fn send(&mut self, v: Value) {
        self.actions.push(Action::Message(v));
    }

    pub fn spawn(&mut self, name: impl Into<String>, behavior: Box<dyn Behavior>) {
        self.actions.push(Action::Spawn(name.into(), behavior));
    }

    pub fn quit(&mut self) {
        self.actions.push(Action::Quit);
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn fresh_unique(&mut self) -> Value {
        self.uniques.fresh()
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        self.rng
    }

    /// Deliver `payload` as a message to this actor alone after `delay_ms`.
    pub fn schedule_wakeup(&mut self, delay_ms: u64, payload: Value) -> WakeupId {
        let id = WakeupId(*self.next_wakeup);
        *self.next_wakeup += 1;
        self.wakeups.push(WakeupOp::Schedule(id, self.now + delay_ms, payload));
        id
    }

    pub fn cancel_wakeup(&mut self, id: WakeupId) {
        self.wakeups.push(WakeupOp::Cancel(id));
    }

    pub fn note_stop_handler(&mut self) {
        self.stats.stop_handlers_run += 1;
    }
}

struct ActorSlot {
    behavior: Option<Box<dyn Behavior>>,
    stats: ActorStats,
}

#[derive(Default)]
struct InterestSet {
    assertions: Vec<Pattern>,
    messages: Vec<Pattern>,
}

impl InterestSet {
    fn from_contributions(contrib: Option<&BTreeMap<Value, usize>>) -> Self {
        let mut set = InterestSet::default();
        let Some(contrib) = contrib else {
            return set;
        };
        let start = Value::record(OBSERVE, vec![]);
        for v in contrib.keys().skip_while(|v| *v < &start) {
            if !v.is_record_labeled(OBSERVE) {
                break;
            }
            match Interest::from_observe(v) {
                Some(Ok(Interest::Assertions(p))) => set.assertions.push(p),
                Some(Ok(Interest::Messages(p))) => set.messages.push(p),
                Some(Err(e)) => warn!("ignoring interest {v}: {e}"),
                None => {}
            }
        }
        set
    }

    fn matches(&self, v: &Value) -> bool {
        self.assertions.iter().any(|p| p.is_match(v))
    }

    fn wants_message(&self, v: &Value) -> bool {
        self.messages.iter().any(|p| p.is_match(v))
    }
}

enum Clock {
    Virtual(u64),
    Wall(Instant),
}

type SharedInbox = Arc<Mutex<VecDeque<Value>>>;

/// Submits external messages from any thread; drained between turns.
#[derive(Clone)]
pub struct InboxHandle {
    inbox: SharedInbox,
}

impl InboxHandle {
    pub fn send(&self, v: Value) {
        self.inbox.lock().expect("inbox lock").push_back(v);
    }
}

/// A dataspace and its deterministic scheduler.
pub struct Dataspace {
    config: DataspaceConfig,
    bag: AssertionBag,
    actors: BTreeMap<ActorId, ActorSlot>,
    next_actor: u64,
    queue: VecDeque<(ActorId, Event)>,
    turn: u64,
    uniques: UniqueSource,
    rng: ChaCha8Rng,
    clock: Clock,
    timers: BTreeMap<(u64, WakeupId), (ActorId, Value)>,
    timer_deadlines: BTreeMap<WakeupId, u64>,
    next_wakeup: u64,
    views: BTreeMap<ActorId, BTreeSet<Value>>,
    interests: BTreeMap<ActorId, InterestSet>,
    trace: Vec<TurnRecord>,
    sinks: Vec<Box<dyn Write>>,
    subscribers: Vec<mpsc::Sender<String>>,
    inbox: SharedInbox,
    crash_plan: BTreeMap<ActorId, u64>,
}

impl Default for Dataspace {
    fn default() -> Self {
        Dataspace::new(DataspaceConfig::default())
    }
}

impl Dataspace {
    pub fn new(config: DataspaceConfig) -> Self {
        let clock = match config.clock {
            ClockMode::Virtual => Clock::Virtual(0),
            ClockMode::Wall => Clock::Wall(Instant::now()),
        };
        Dataspace {
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            config,
            bag: AssertionBag::new(),
            actors: BTreeMap::new(),
            next_actor: 0,
            queue: VecDeque::new(),
            turn: 0,
            uniques: UniqueSource::new(),
            clock,
            timers: BTreeMap::new(),
            timer_deadlines: BTreeMap::new(),
            next_wakeup: 0,
            views: BTreeMap::new(),
            interests: BTreeMap::new(),
            trace: Vec::new(),
            sinks: Vec::new(),
            subscribers: Vec::new(),
            inbox: Arc::default(),
            crash_plan: BTreeMap::new(),
        }
    }

    /// Write each turn as a JSON line to `sink`.
    pub fn add_trace_sink(&mut self, sink: Box<dyn Write>) {
        self.sinks.push(sink);
    }

    /// Receive each turn's JSON line on a channel.
    pub fn subscribe(&mut self) -> mpsc::Receiver<String> {
        let (tx, rx) = mpsc::channel();
        self.subscribers.push(tx);
        rx
    }

    pub fn inbox(&self) -> InboxHandle {
        InboxHandle { inbox: self.inbox.clone() }
    }

    pub fn spawn(&mut self, name: impl Into<String>, behavior: Box<dyn Behavior>) -> ActorId {
        let id = self.alloc_actor(name.into(), behavior);
        self.queue.push_back((id, Event::Boot));
        id
    }

    fn alloc_actor(&mut self, name: String, behavior: Box<dyn Behavior>) -> ActorId {
        let id = ActorId(self.next_actor);
        self.next_actor += 1;
        debug!("spawn {id} {name}");
        let stats = ActorStats { name, alive: true, ..ActorStats::default() };
        self.actors.insert(id, ActorSlot { behavior: Some(behavior), stats });
        id
    }

    /// Broadcast a message from outside any actor.
    pub fn inject_message(&mut self, v: Value) {
        for (actor, interests) in &self.interests {
            if interests.wants_message(&v) {
                self.queue.push_back((*actor, Event::Message(v.clone())));
            }
        }
    }

    /// Crash `actor` when it next gets to run.
    pub fn inject_crash(&mut self, actor: ActorId) {
        self.queue.push_back((actor, Event::CrashInjected));
    }

    /// Crash `actor` in place of its `nth` turn, counting the boot turn as 0.
    pub fn schedule_crash(&mut self, actor: ActorId, nth: u64) {
        self.crash_plan.insert(actor, nth);
    }

    pub fn now(&self) -> u64 {
        match self.clock {
            Clock::Virtual(now) => now,
            Clock::Wall(start) => start.elapsed().as_millis() as u64,
        }
    }

    pub fn turns_run(&self) -> u64 {
        self.turn
    }

    pub fn trace(&self) -> &[TurnRecord] {
        &self.trace
    }

    pub fn pending_events(&self) -> usize {
        self.queue.len()
    }

    pub fn pending_timers(&self) -> usize {
        self.timers.len()
    }

    /// Deadline of the earliest scheduled wakeup.
    pub fn next_deadline(&self) -> Option<u64> {
        self.timers.keys().next().map(|(d, _)| *d)
    }

    pub fn is_alive(&self, actor: ActorId) -> bool {
        self.actors.get(&actor).is_some_and(|s| s.stats.alive)
    }

    pub fn actor_ids(&self) -> Vec<ActorId> {
        self.actors.keys().copied().collect()
    }

    pub fn live_actors(&self) -> Vec<ActorId> {
        self.actors.iter().filter(|(_, s)| s.stats.alive).map(|(id, _)| *id).collect()
    }

    pub fn actor_stats(&self, actor: ActorId) -> Option<&ActorStats> {
        self.actors.get(&actor).map(|s| &s.stats)
    }

    pub fn find_actor(&self, name: &str) -> Option<ActorId> {
        self.actors.iter().find(|(_, s)| s.stats.alive && s.stats.name == name).map(|(id, _)| *id)
    }

    /// The behavior of a live actor, for inspection.
    pub fn behavior<T: 'static>(&self, actor: ActorId) -> Option<&T> {
        self.actors.get(&actor)?.behavior.as_ref()?.as_any().downcast_ref()
    }

    pub fn bag(&self) -> &AssertionBag {
        &self.bag
    }

    /// Present values matching `p`.
    pub fn query(&self, p: &Pattern) -> BTreeSet<Value> {
        self.bag.present().filter(|v| p.is_match(v)).cloned().collect()
    }

    pub fn contributions(&self, actor: ActorId) -> BTreeMap<Value, usize> {
        self.bag.contributions(actor)
    }

    /// Values already delivered to `actor` under its current interests.
    pub fn view(&self, actor: ActorId) -> BTreeSet<Value> {
        self.views.get(&actor).cloned().unwrap_or_default()
    }

    /// What a new interest in `p` would show `actor` beyond what it already knows.
    pub fn initial_interest_patch(&self, actor: ActorId, p: &Pattern) -> Option<Patch> {
        let known = self.views.get(&actor);
        let added: BTreeSet<Value> =
            self.bag.present().filter(|v| p.is_match(v) && !known.is_some_and(|k| k.contains(*v))).cloned().collect();
        (!added.is_empty()).then(|| Patch { added, removed: BTreeSet::new() })
    }

    fn drain_inbox(&mut self) {
        let pending: Vec<Value> = self.inbox.lock().expect("inbox lock").drain(..).collect();
        for v in pending {
            self.inject_message(v);
        }
    }

    /// Queue the earliest wakeup due by `now`, if any.
    fn fire_due_timer(&mut self) -> bool {
        let now = self.now();
        let Some((&(deadline, id), _)) = self.timers.iter().next() else {
            return false;
        };
        if deadline > now {
            return false;
        }
        let (actor, payload) = self.timers.remove(&(deadline, id)).expect("timer");
        self.timer_deadlines.remove(&id);
        if self.is_alive(actor) {
            self.queue.push_back((actor, Event::Message(payload)));
        }
        true
    }

    /// Run one turn: the oldest pending event for a live actor.
    pub fn run_turn(&mut self) -> Result<TurnRecord, DataspaceError> {
        loop {
            let (actor, event) = self.queue.pop_front().ok_or(DataspaceError::Idle)?;
            if !self.is_alive(actor) {
                continue;
            }
            return Ok(self.execute(actor, event));
        }
    }

    fn execute(&mut self, actor: ActorId, event: Event) -> TurnRecord {
        let turn = self.turn;
        self.turn += 1;
        let now = self.now();
        let slot = self.actors.get_mut(&actor).expect("live actor");
        let nth = slot.stats.turns;
        slot.stats.turns += 1;
        let mut behavior = slot.behavior.take().expect("behavior present");
        let planned = self.crash_plan.get(&actor) == Some(&nth);

        let mut env = TurnEnv {
            actor,
            now,
            actions: Vec::new(),
            wakeups: Vec::new(),
            uniques: &mut self.uniques,
            rng: &mut self.rng,
            next_wakeup: &mut self.next_wakeup,
            stats: &mut slot.stats,
        };
        let outcome: Result<(), String> = if event == Event::CrashInjected || planned {
            Err("injected crash".to_owned())
        } else {
            match catch_unwind(AssertUnwindSafe(|| behavior.handle(&event, &mut env))) {
                Ok(Ok(())) => Ok(()),
                Ok(Err(e)) => Err(e.to_string()),
                Err(panic) => Err(panic_message(panic.as_ref())),
            }
        };

        let record = match outcome {
            Ok(()) => {
                let TurnEnv { actions, wakeups, .. } = env;
                slot.behavior = Some(behavior);
                let records = actions.iter().map(Action::record).collect();
                self.apply_wakeups(actor, wakeups);
                self.apply_actions(actor, actions);
                TurnRecord { turn, actor, event, actions: records, crashed: false }
            }
            Err(reason) => {
                warn!("actor {actor} crashed: {reason}");
                drop(env);
                self.crash(actor, behavior, reason);
                TurnRecord { turn, actor, event, actions: Vec::new(), crashed: true }
            }
        };
        self.emit(&record);
        record
    }

    fn crash(&mut self, actor: ActorId, mut behavior: Box<dyn Behavior>, reason: String) {
        let slot = self.actors.get_mut(&actor).expect("crashing actor");
        let before = slot.stats.stop_handlers_run;
        let mut env = TurnEnv {
            actor,
            now: 0,
            actions: Vec::new(),
            wakeups: Vec::new(),
            uniques: &mut self.uniques,
            rng: &mut self.rng,
            next_wakeup: &mut self.next_wakeup,
            stats: &mut slot.stats,
        };
        // A teardown that itself panics changes nothing: the actor is gone either way.
        let _ = catch_unwind(AssertUnwindSafe(|| behavior.on_crash(&mut env)));
        drop(env);
        slot.stats.stop_handlers_on_crash += slot.stats.stop_handlers_run - before;
        slot.stats.crashed = true;
        slot.stats.crash_reason = Some(reason);
        self.terminate(actor);
    }

    fn terminate(&mut self, actor: ActorId) {
        let slot = self.actors.get_mut(&actor).expect("terminating actor");
        slot.stats.alive = false;
        slot.behavior = None;
        self.views.remove(&actor);
        self.interests.remove(&actor);
        let stale: Vec<_> = self.timers.iter().filter(|(_, (owner, _))| *owner == actor).map(|(k, _)| *k).collect();
        for key in stale {
            self.timers.remove(&key);
            self.timer_deadlines.remove(&key.1);
        }
        let vanished = self.bag.remove_actor(actor);
        let patch = Patch { added: BTreeSet::new(), removed: vanished.into_iter().collect() };
        self.route(&patch, None);
    }

    fn apply_wakeups(&mut self, actor: ActorId, ops: Vec<WakeupOp>) {
        for op in ops {
            match op {
                WakeupOp::Schedule(id, deadline, payload) => {
                    self.timers.insert((deadline, id), (actor, payload));
                    self.timer_deadlines.insert(id, deadline);
                }
                WakeupOp::Cancel(id) => {
                    if let Some(deadline) = self.timer_deadlines.remove(&id) {
                        self.timers.remove(&(deadline, id));
                    }
                }
            }
        }
    }

    fn apply_actions(&mut self, actor: ActorId, actions: Vec<Action>) {
        let mut before: BTreeMap<Value, bool> = BTreeMap::new();
        let mut followups: Vec<(ActorId, Event)> = Vec::new();
        let mut interests_dirty = false;
        let mut interests_touched = false;
        let mut quit = false;
        for action in actions {
            if quit {
                warn!("actor {actor} acted after quitting; ignored {action:?}");
                continue;
            }
            match action {
                Action::Assert(v) => {
                    before.entry(v.clone()).or_insert_with(|| self.bag.is_present(&v));
                    interests_dirty |= v.is_record_labeled(OBSERVE);
                    interests_touched |= interests_dirty;
                    self.bag.add(actor, v);
                }
                Action::Retract(v) => {
                    before.entry(v.clone()).or_insert_with(|| self.bag.is_present(&v));
                    interests_dirty |= v.is_record_labeled(OBSERVE);
                    interests_touched |= interests_dirty;
                    if self.bag.remove(actor, &v).is_err() {
                        warn!("actor {actor} retracted unheld {v}");
                    }
                }
                Action::Message(v) => {
                    if interests_dirty {
                        self.refresh_interests(actor);
                        interests_dirty = false;
                    }
                    for (target, interests) in &self.interests {
                        if interests.wants_message(&v) {
                            followups.push((*target, Event::Message(v.clone())));
                        }
                    }
                }
                Action::Spawn(name, behavior) => {
                    let child = self.alloc_actor(name, behavior);
                    followups.push((child, Event::Boot));
                }
                Action::Quit => quit = true,
            }
        }
        if interests_dirty {
            self.refresh_interests(actor);
        }
        if quit {
            let slot = self.actors.get_mut(&actor).expect("quitting actor");
            slot.stats.alive = false;
            slot.behavior = None;
            self.views.remove(&actor);
            self.interests.remove(&actor);
            for v in self.bag.contributions(actor).into_keys() {
                before.entry(v.clone()).or_insert(true);
            }
            self.bag.remove_actor(actor);
        }
        let mut patch = Patch::default();
        for (v, was) in before {
            match (was, self.bag.is_present(&v)) {
                (false, true) => {
                    patch.added.insert(v);
                }
                (true, false) => {
                    patch.removed.insert(v);
                }
                _ => {}
            }
        }
        let changed = (!quit && interests_touched).then_some(actor);
        self.route(&patch, changed);
        self.queue.extend(followups);
    }

    fn refresh_interests(&mut self, actor: ActorId) {
        let set = InterestSet::from_contributions(self.bag.contributions_ref(actor));
        if set.assertions.is_empty() && set.messages.is_empty() {
            self.interests.remove(&actor);
        } else {
            self.interests.insert(actor, set);
        }
    }

    /// Deliver the filtered patch to each interested actor. The actor named by
    /// `recompute` may have changed its interests, so its whole view is
    /// recomputed against the bag instead of filtered.
    fn route(&mut self, patch: &Patch, recompute: Option<ActorId>) {
        let mut targets: BTreeSet<ActorId> = self.interests.keys().copied().collect();
        targets.extend(self.views.keys().copied());
        for target in targets {
            let interests = self.interests.get(&target);
            let known = self.views.entry(target).or_default();
            let mut delta = Patch::default();
            if Some(target) == recompute {
                let fresh: BTreeSet<Value> = match interests {
                    Some(i) if !i.assertions.is_empty() => {
                        self.bag.present().filter(|v| i.matches(v)).cloned().collect()
                    }
                    _ => BTreeSet::new(),
                };
                delta.added = fresh.difference(known).cloned().collect();
                delta.removed = known.difference(&fresh).cloned().collect();
                *known = fresh;
            } else {
                for v in &patch.added {
                    if interests.is_some_and(|i| i.matches(v)) {
                        known.insert(v.clone());
                        delta.added.insert(v.clone());
                    }
                }
                for v in &patch.removed {
                    if known.remove(v) {
                        delta.removed.insert(v.clone());
                    }
                }
            }
            if known.is_empty() {
                self.views.remove(&target);
            }
            if !delta.is_empty() {
                self.queue.push_back((target, Event::Patch(delta)));
            }
        }
    }

    fn emit(&mut self, record: &TurnRecord) {
        if !self.sinks.is_empty() || !self.subscribers.is_empty() {
            let line = record.to_json_line();
            for sink in &mut self.sinks {
                if let Err(e) = writeln!(sink, "{line}") {
                    warn!("trace sink write failed: {e}");
                }
            }
            self.subscribers.retain(|tx| tx.send(line.clone()).is_ok());
        }
        if self.config.record_trace {
            self.trace.push(record.clone());
        }
    }

    pub fn flush_trace(&mut self) -> std::io::Result<()> {
        for sink in &mut self.sinks {
            sink.flush()?;
        }
        Ok(())
    }

    /// Quiescent: nothing queued and no wakeup already due.
    pub fn is_quiescent(&self) -> bool {
        self.queue.is_empty() && self.next_deadline().is_none_or(|d| d > self.now())
    }

    /// Run turns until quiescent, returning how many ran.
    pub fn run_until_quiescent(&mut self, max_turns: usize) -> Result<usize, DataspaceError> {
        let mut ran = 0;
        loop {
            self.drain_inbox();
            if self.queue.is_empty() && !self.fire_due_timer() {
                return Ok(ran);
            }
            if self.queue.is_empty() {
                continue;
            }
            if ran == max_turns {
                return Err(DataspaceError::MaxTurnsExceeded(max_turns));
            }
            match self.run_turn() {
                Ok(_) => ran += 1,
                Err(DataspaceError::Idle) => {}
                Err(e) => return Err(e),
            }
        }
    }

    /// Move the virtual clock forward by `delta_ms`, firing due wakeups in
    /// deadline order and running to quiescence after each.
    pub fn advance_virtual_time(&mut self, delta_ms: u64, max_turns: usize) -> Result<usize, DataspaceError> {
        let Clock::Virtual(now) = self.clock else {
            return Err(DataspaceError::WallClockMode);
        };
        if !self.queue.is_empty() {
            return Err(DataspaceError::NotQuiescent);
        }
        let target = now + delta_ms;
        let mut ran = 0;
        while let Some(deadline) = self.next_deadline().filter(|d| *d <= target) {
            if let Clock::Virtual(ref mut t) = self.clock {
                *t = (*t).max(deadline);
            }
            ran += self.run_until_quiescent(max_turns.saturating_sub(ran))?;
        }
        self.clock = Clock::Virtual(target);
        ran += self.run_until_quiescent(max_turns.saturating_sub(ran))?;
        Ok(ran)
    }

    /// Drive the dataspace against the wall clock until `keep_going` says stop.
    pub fn run_realtime(&mut self, mut keep_going: impl FnMut(&Dataspace) -> bool) -> Result<(), DataspaceError> {
        if !matches!(self.clock, Clock::Wall(_)) {
            return Err(DataspaceError::VirtualClockMode);
        }
        while keep_going(self) {
            self.drain_inbox();
            if self.fire_due_timer() || !self.queue.is_empty() {
                match self.run_turn() {
                    Ok(_) | Err(DataspaceError::Idle) => {}
                    Err(e) => return Err(e),
                }
                continue;
            }
            let wait = self.next_deadline().map_or(5, |d| d.saturating_sub(self.now()).clamp(1, 5));
            std::thread::sleep(Duration::from_millis(wait));
        }
        Ok(())
    }
}

fn panic_message(payload: &(dyn std::any::Any + Send)) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        (*s).to_owned()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else if let Some(e) = payload.downcast_ref::<crate::facets::FacetError>() {
        e.to_string()
    } else {
        "panic".to_owned()
    }
}
