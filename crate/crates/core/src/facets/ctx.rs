use std::any::Any;
use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Debug;
use std::marker::PhantomData;
use std::rc::Rc;

use log::warn;
use rand_chacha::ChaCha8Rng;

use crate::dataspace::{ActorId, Behavior, TurnEnv, WakeupId};
use crate::values::{message_interest, observe, Pattern, Value};

use super::{fail, EndpointId, FacetError, FacetId, Field, FieldId, Match, Trigger};

pub(crate) type Handler = Rc<dyn Fn(&mut Ctx<'_, '_>, &Match)>;
pub(crate) type Compute = Rc<dyn Fn(&Ctx<'_, '_>) -> Option<Value>>;
pub(crate) type Script = Box<dyn FnOnce(&mut Ctx<'_, '_>)>;

pub(crate) enum EndpointKind {
    Assert { compute: Compute, current: Option<Value>, deps: BTreeSet<FieldId> },
    Handler { trigger: Trigger, pattern: Pattern, interest: Value, body: Handler },
}

pub(crate) struct EndpointSlot {
    pub(crate) facet: FacetId,
    pub(crate) kind: EndpointKind,
}

pub(crate) struct FieldSlot {
    value: Box<dyn Any>,
    describe: fn(&dyn Any) -> String,
    dependents: BTreeSet<EndpointId>,
}

impl FieldSlot {
    pub(crate) fn describe(&self) -> String {
        (self.describe)(self.value.as_ref())
    }
}

#[derive(Default)]
pub(crate) struct FacetNode {
    pub(crate) label: String,
    next_child: u32,
    pub(crate) endpoints: Vec<EndpointId>,
    pub(crate) fields: Vec<FieldId>,
    pub(crate) stop_handlers: Vec<Script>,
    start_handlers: Vec<Script>,
    started: bool,
    pub(crate) dying: bool,
}

/// Per-actor facet state.
#[derive(Default)]
pub(crate) struct Runtime {
    pub(crate) facets: BTreeMap<FacetId, FacetNode>,
    pub(crate) endpoints: BTreeMap<EndpointId, EndpointSlot>,
    pub(crate) fields: BTreeMap<FieldId, FieldSlot>,
    next_endpoint: u64,
    next_field: u64,
    next_root: u32,
    /// Values the dataspace has told this actor about.
    pub(crate) mirror: BTreeSet<Value>,
    dirty: BTreeSet<EndpointId>,
    pub(crate) needs_initial: BTreeSet<EndpointId>,
    pub(crate) recomputations: u64,
    reads: RefCell<Option<BTreeSet<FieldId>>>,
}

impl Runtime {
    pub(crate) fn is_live(&self, id: &FacetId) -> bool {
        self.facets.get(id).is_some_and(|n| !n.dying)
    }

    pub(crate) fn endpoint_live(&self, ep: EndpointId) -> bool {
        self.endpoints.get(&ep).is_some_and(|slot| self.is_live(&slot.facet))
    }

    /// Facets strictly below `id`, in pre-order.
    fn descendants(&self, id: &FacetId) -> Vec<FacetId> {
        self.facets.range(id.clone()..).skip(1).take_while(|(k, _)| k.is_within(id)).map(|(k, _)| k.clone()).collect()
    }

    fn children(&self, id: &FacetId) -> Vec<FacetId> {
        self.descendants(id).into_iter().filter(|k| k.path().len() == id.path().len() + 1).collect()
    }

    fn post_order(&self, id: &FacetId, out: &mut Vec<FacetId>) {
        for child in self.children(id) {
            self.post_order(&child, out);
        }
        out.push(id.clone());
    }

    pub(crate) fn clear(&mut self) {
        self.facets.clear();
        self.endpoints.clear();
        self.fields.clear();
        self.dirty.clear();
        self.needs_initial.clear();
    }
}

/// Execution context handed to every facet body.
pub struct Ctx<'a, 'e> {
    pub(crate) rt: &'a mut Runtime,
    pub(crate) env: &'a mut TurnEnv<'e>,
    pub(crate) facet: Option<FacetId>,
}

impl<'a, 'e> Ctx<'a, 'e> {
    pub(crate) fn new(rt: &'a mut Runtime, env: &'a mut TurnEnv<'e>, facet: Option<FacetId>) -> Self {
        Ctx { rt, env, facet }
    }

    /// Run `f` with `facet` as the current facet, then refresh dirty assertions.
    pub(crate) fn run_in<R>(&mut self, facet: Option<FacetId>, f: impl FnOnce(&mut Ctx<'_, 'e>) -> R) -> R {
        let mut sub = Ctx { rt: &mut *self.rt, env: &mut *self.env, facet };
        let r = f(&mut sub);
        sub.refresh();
        r
    }

    pub(crate) fn invoke(&mut self, ep: EndpointId, m: &Match) {
        let Some(slot) = self.rt.endpoints.get(&ep) else {
            return;
        };
        if !self.rt.is_live(&slot.facet) {
            return;
        }
        let EndpointKind::Handler { body, .. } = &slot.kind else {
            return;
        };
        let body = body.clone();
        let facet = slot.facet.clone();
        self.run_in(Some(facet), |ctx| body(ctx, m));
    }

    // ---- identity and environment ----

    /// The facet whose code is running.
    pub fn facet_id(&self) -> FacetId {
        self.facet.clone().unwrap_or_else(|| fail(FacetError::OutsideFacetContext))
    }

    pub fn try_facet_id(&self) -> Option<FacetId> {
        self.facet.clone()
    }

    pub fn actor_id(&self) -> ActorId {
        self.env.actor()
    }

    pub fn now(&self) -> u64 {
        self.env.now()
    }

    pub fn fresh_unique(&mut self) -> Value {
        self.env.fresh_unique()
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        self.env.rng()
    }

    pub fn is_alive(&self, id: &FacetId) -> bool {
        self.rt.is_live(id)
    }

    /// Values currently visible to this actor through its interests.
    pub fn view(&self) -> &BTreeSet<Value> {
        &self.rt.mirror
    }

    pub fn send(&mut self, v: Value) {
        self.env.send(v);
    }

    pub fn spawn(&mut self, name: impl Into<String>, behavior: Box<dyn Behavior>) {
        self.env.spawn(name, behavior);
    }

    /// Spawn an actor whose root facet runs `boot`.
    pub fn spawn_facets(&mut self, name: impl Into<String>, boot: impl FnOnce(&mut Ctx<'_, '_>) + 'static) {
        let name = name.into();
        self.env.spawn(name.clone(), Box::new(super::FacetActor::new(name, boot)));
    }

    pub fn schedule_wakeup(&mut self, delay_ms: u64, payload: Value) -> WakeupId {
        self.env.schedule_wakeup(delay_ms, payload)
    }

    pub fn cancel_wakeup(&mut self, id: WakeupId) {
        self.env.cancel_wakeup(id);
    }

    // ---- fields ----

    /// A new field owned by the current facet.
    pub fn field<T: Clone + Debug + 'static>(&mut self, init: T) -> Field<T> {
        let owner = self.facet_id();
        let id = FieldId(self.rt.next_field);
        self.rt.next_field += 1;
        self.rt.fields.insert(
            id,
            FieldSlot {
                value: Box::new(init),
                describe: |v| format!("{:?}", v.downcast_ref::<T>().expect("field type")),
                dependents: BTreeSet::new(),
            },
        );
        self.rt.facets.get_mut(&owner).expect("current facet").fields.push(id);
        Field { id, _marker: PhantomData }
    }

    /// Read a field. Inside an assertion's computation this records a dependency.
    pub fn get<T: Clone + 'static>(&self, field: &Field<T>) -> T {
        self.with(field, T::clone)
    }

    pub fn with<T: 'static, R>(&self, field: &Field<T>, f: impl FnOnce(&T) -> R) -> R {
        let slot = self.rt.fields.get(&field.id).unwrap_or_else(|| fail(FacetError::DeadFieldAccess(field.id)));
        if let Some(reads) = self.rt.reads.borrow_mut().as_mut() {
            reads.insert(field.id);
        }
        f(slot.value.downcast_ref().expect("field type"))
    }

    pub fn try_get<T: Clone + 'static>(&self, field: &Field<T>) -> Result<T, FacetError> {
        match self.rt.fields.get(&field.id) {
            Some(slot) => Ok(slot.value.downcast_ref::<T>().expect("field type").clone()),
            None => Err(FacetError::DeadFieldAccess(field.id)),
        }
    }

    pub fn set<T: 'static>(&mut self, field: &Field<T>, v: T) {
        self.update(field, |cell| *cell = v);
    }

    /// Modify a field in place; dependent assertions refresh after the body.
    pub fn update<T: 'static, R>(&mut self, field: &Field<T>, f: impl FnOnce(&mut T) -> R) -> R {
        let slot = self.rt.fields.get_mut(&field.id).unwrap_or_else(|| fail(FacetError::DeadFieldAccess(field.id)));
        let r = f(slot.value.downcast_mut().expect("field type"));
        self.rt.dirty.extend(slot.dependents.iter().copied());
        r
    }

    // ---- endpoints ----

    fn register(&mut self, kind: EndpointKind) -> EndpointId {
        let facet = self.facet_id();
        let id = EndpointId(self.rt.next_endpoint);
        self.rt.next_endpoint += 1;
        self.rt.endpoints.insert(id, EndpointSlot { facet: facet.clone(), kind });
        self.rt.facets.get_mut(&facet).expect("current facet").endpoints.push(id);
        id
    }

    /// Assert a fixed value for the lifetime of the current facet.
    pub fn assert_value(&mut self, v: Value) -> EndpointId {
        self.assert_with(move |_| Some(v.clone()))
    }

    /// Assert the value computed from fields; recomputed when they change.
    pub fn assert_dyn(&mut self, compute: impl Fn(&Ctx<'_, '_>) -> Value + 'static) -> EndpointId {
        self.assert_with(move |ctx| Some(compute(ctx)))
    }

    /// Like [`Ctx::assert_dyn`]; `None` asserts nothing.
    pub fn assert_with(&mut self, compute: impl Fn(&Ctx<'_, '_>) -> Option<Value> + 'static) -> EndpointId {
        let compute: Compute = Rc::new(compute);
        let id = self.register(EndpointKind::Assert { compute, current: None, deps: BTreeSet::new() });
        self.recompute(id);
        id
    }

    pub fn on_asserted(&mut self, p: Pattern, body: impl Fn(&mut Ctx<'_, '_>, &Match) + 'static) -> EndpointId {
        self.on(Trigger::Asserted, p, body)
    }

    pub fn on_retracted(&mut self, p: Pattern, body: impl Fn(&mut Ctx<'_, '_>, &Match) + 'static) -> EndpointId {
        self.on(Trigger::Retracted, p, body)
    }

    pub fn on_message(&mut self, p: Pattern, body: impl Fn(&mut Ctx<'_, '_>, &Match) + 'static) -> EndpointId {
        self.on(Trigger::Message, p, body)
    }

    /// Install a handler; its interest is asserted while the facet lives.
    pub fn on(
        &mut self,
        trigger: Trigger,
        pattern: Pattern,
        body: impl Fn(&mut Ctx<'_, '_>, &Match) + 'static,
    ) -> EndpointId {
        if let Err(crate::values::PatternError::DuplicateCapture(name)) = pattern.check_linear() {
            fail(FacetError::NonLinearPattern(name));
        }
        let interest = match trigger {
            Trigger::Message => message_interest(&pattern),
            Trigger::Asserted | Trigger::Retracted => observe(&pattern),
        };
        self.env.assert(interest.clone());
        let id = self.register(EndpointKind::Handler { trigger, pattern, interest, body: Rc::new(body) });
        if trigger == Trigger::Asserted {
            self.rt.needs_initial.insert(id);
        }
        id
    }

    /// Run `body` once the current facet has finished installing its endpoints.
    pub fn on_start(&mut self, body: impl FnOnce(&mut Ctx<'_, '_>) + 'static) {
        let facet = self.facet_id();
        let node = self.rt.facets.get_mut(&facet).expect("current facet");
        if node.started {
            self.run_in(Some(facet), body);
        } else {
            node.start_handlers.push(Box::new(body));
        }
    }

    /// Run `body` when the current facet is stopped in an orderly way.
    pub fn on_stop(&mut self, body: impl FnOnce(&mut Ctx<'_, '_>) + 'static) {
        let facet = self.facet_id();
        self.rt.facets.get_mut(&facet).expect("current facet").stop_handlers.push(Box::new(body));
    }

    // ---- facets ----

    /// Start a child of the current facet, or a new root when there is none.
    pub fn react(&mut self, body: impl FnOnce(&mut Ctx<'_, '_>) + 'static) -> FacetId {
        self.react_named("", body)
    }

    pub fn react_named(&mut self, label: impl Into<String>, body: impl FnOnce(&mut Ctx<'_, '_>) + 'static) -> FacetId {
        let id = match &self.facet {
            Some(parent) => {
                let Some(node) = self.rt.facets.get_mut(parent).filter(|n| !n.dying) else {
                    warn!("react under stopped facet {parent}; ignored");
                    return parent.child(u32::MAX);
                };
                let index = node.next_child;
                node.next_child += 1;
                parent.child(index)
            }
            None => {
                let id = FacetId(vec![self.rt.next_root]);
                self.rt.next_root += 1;
                id
            }
        };
        self.rt.facets.insert(id.clone(), FacetNode { label: label.into(), ..FacetNode::default() });
        self.run_in(Some(id.clone()), body);
        if let Some(node) = self.rt.facets.get_mut(&id) {
            node.started = true;
            let starts = std::mem::take(&mut node.start_handlers);
            for start in starts {
                if !self.rt.is_live(&id) {
                    break;
                }
                self.run_in(Some(id.clone()), start);
            }
        }
        id
    }

    pub fn stop(&mut self, id: &FacetId) {
        self.stop_inner(id, None);
    }

    /// Stop `id`, then run `cont` under its parent.
    pub fn stop_then(&mut self, id: &FacetId, cont: impl FnOnce(&mut Ctx<'_, '_>) + 'static) {
        self.stop_inner(id, Some(Box::new(cont)));
    }

    pub fn stop_current(&mut self) {
        let id = self.facet_id();
        self.stop(&id);
    }

    fn stop_inner(&mut self, id: &FacetId, cont: Option<Script>) {
        if !self.rt.is_live(id) {
            warn!("{}", FacetError::StoppingDeadFacet(id.clone()));
            return;
        }
        let mut order = Vec::new();
        self.rt.post_order(id, &mut order);
        for fid in &order {
            if let Some(node) = self.rt.facets.get_mut(fid) {
                node.dying = true;
            }
        }
        for fid in &order {
            let handlers = match self.rt.facets.get_mut(fid) {
                Some(node) => std::mem::take(&mut node.stop_handlers),
                None => continue,
            };
            for h in handlers {
                self.env.note_stop_handler();
                self.run_in(Some(fid.clone()), h);
            }
        }
        let mut doomed = vec![id.clone()];
        doomed.extend(self.rt.descendants(id));
        for fid in doomed {
            let Some(node) = self.rt.facets.remove(&fid) else {
                continue;
            };
            for ep in node.endpoints {
                self.remove_endpoint(ep);
            }
            for f in node.fields {
                self.rt.fields.remove(&f);
            }
        }
        if let Some(cont) = cont {
            let parent = id.parent().filter(|p| self.rt.facets.contains_key(p));
            self.run_in(parent, cont);
        }
    }

    fn remove_endpoint(&mut self, ep: EndpointId) {
        self.rt.dirty.remove(&ep);
        self.rt.needs_initial.remove(&ep);
        let Some(slot) = self.rt.endpoints.remove(&ep) else {
            return;
        };
        match slot.kind {
            EndpointKind::Assert { current, deps, .. } => {
                for f in deps {
                    if let Some(field) = self.rt.fields.get_mut(&f) {
                        field.dependents.remove(&ep);
                    }
                }
                if let Some(v) = current {
                    self.env.retract(v);
                }
            }
            EndpointKind::Handler { interest, .. } => self.env.retract(interest),
        }
    }

    // ---- dataflow ----

    fn recompute(&mut self, ep: EndpointId) {
        let Some(EndpointSlot { kind: EndpointKind::Assert { compute, .. }, .. }) = self.rt.endpoints.get(&ep) else {
            return;
        };
        let compute = compute.clone();
        *self.rt.reads.borrow_mut() = Some(BTreeSet::new());
        let fresh = compute(self);
        let reads = self.rt.reads.borrow_mut().take().unwrap_or_default();
        self.rt.recomputations += 1;

        let Some(EndpointSlot { kind: EndpointKind::Assert { current, deps, .. }, .. }) =
            self.rt.endpoints.get_mut(&ep)
        else {
            return;
        };
        let old_deps = std::mem::replace(deps, reads.clone());
        let changed = *current != fresh;
        let old = if changed { std::mem::replace(current, fresh.clone()) } else { None };
        for f in old_deps.difference(&reads) {
            if let Some(field) = self.rt.fields.get_mut(f) {
                field.dependents.remove(&ep);
            }
        }
        for f in &reads {
            if let Some(field) = self.rt.fields.get_mut(f) {
                field.dependents.insert(ep);
            }
        }
        if changed {
            if let Some(old) = old {
                self.env.retract(old);
            }
            if let Some(new) = fresh {
                self.env.assert(new);
            }
        }
    }

    /// Recompute every assertion whose fields were written.
    pub(crate) fn refresh(&mut self) {
        while let Some(ep) = self.rt.dirty.pop_first() {
            if self.rt.endpoint_live(ep) {
                self.recompute(ep);
            }
        }
    }
}
