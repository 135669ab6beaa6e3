use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::dataspace::{ActorError, Behavior, Event, TurnEnv};
use crate::values::Value;

use super::ctx::{Ctx, EndpointKind, Runtime, Script};
use super::{EndpointId, FacetId, Match, Trigger};

/// An actor whose behavior is a tree of facets.
pub struct FacetActor {
    name: String,
    boot: Option<Script>,
    rt: Runtime,
}

impl FacetActor {
    pub fn new(name: impl Into<String>, boot: impl FnOnce(&mut Ctx<'_, '_>) + 'static) -> Self {
        FacetActor { name: name.into(), boot: Some(Box::new(boot)), rt: Runtime::default() }
    }

    pub fn boxed(name: impl Into<String>, boot: impl FnOnce(&mut Ctx<'_, '_>) + 'static) -> Box<dyn Behavior> {
        Box::new(Self::new(name, boot))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn live_facets(&self) -> Vec<FacetId> {
        self.rt.facets.keys().cloned().collect()
    }

    /// How many times assertion computations have run.
    pub fn recomputations(&self) -> u64 {
        self.rt.recomputations
    }

    /// What the live tree asserts: every current assertion value plus one
    /// interest per handler, with multiplicity.
    pub fn contributions(&self) -> BTreeMap<Value, usize> {
        let mut out = BTreeMap::new();
        for slot in self.rt.endpoints.values() {
            let v = match &slot.kind {
                EndpointKind::Assert { current: Some(v), .. } => v,
                EndpointKind::Assert { current: None, .. } => continue,
                EndpointKind::Handler { interest, .. } => interest,
            };
            *out.entry(v.clone()).or_insert(0) += 1;
        }
        out
    }

    /// Indented text picture of the facet tree.
    pub fn render_tree(&self) -> String {
        let mut out = String::new();
        for (id, node) in &self.rt.facets {
            let pad = "  ".repeat(id.depth());
            let label = if node.label.is_empty() && id.parent().is_none() { &self.name } else { &node.label };
            if label.is_empty() {
                let _ = writeln!(out, "{pad}facet {id}");
            } else {
                let _ = writeln!(out, "{pad}facet {id} {label}");
            }
            for f in &node.fields {
                if let Some(slot) = self.rt.fields.get(f) {
                    let _ = writeln!(out, "{pad}  field {f} = {}", slot.describe());
                }
            }
            for ep in &node.endpoints {
                let Some(slot) = self.rt.endpoints.get(ep) else { continue };
                let _ = match &slot.kind {
                    EndpointKind::Assert { current: Some(v), .. } => writeln!(out, "{pad}  assert {v}"),
                    EndpointKind::Assert { current: None, .. } => writeln!(out, "{pad}  assert -"),
                    EndpointKind::Handler { trigger, pattern, .. } => writeln!(out, "{pad}  on {trigger} {pattern}"),
                };
            }
            if !node.stop_handlers.is_empty() {
                let _ = writeln!(out, "{pad}  on stop");
            }
        }
        out
    }

    fn dispatch(&mut self, event: &Event, env: &mut TurnEnv<'_>) {
        let mut ctx = Ctx::new(&mut self.rt, env, None);
        match event {
            Event::Boot => {
                if let Some(boot) = self.boot.take() {
                    let name = self.name.clone();
                    ctx.react_named(name, boot);
                }
            }
            Event::Patch(patch) => {
                for v in &patch.removed {
                    ctx.rt.mirror.remove(v);
                }
                ctx.rt.mirror.extend(patch.added.iter().cloned());
                let calls = snapshot(ctx.rt, |trigger| match trigger {
                    Trigger::Asserted => Some(&patch.added),
                    Trigger::Retracted => Some(&patch.removed),
                    Trigger::Message => None,
                });
                for (ep, m) in calls {
                    ctx.invoke(ep, &m);
                }
            }
            Event::Message(v) => {
                let single = [v.clone()].into();
                let calls = snapshot(ctx.rt, |trigger| (trigger == Trigger::Message).then_some(&single));
                for (ep, m) in calls {
                    ctx.invoke(ep, &m);
                }
            }
            Event::CrashInjected => {}
        }
        // Newly installed asserted-handlers catch up with what is already visible.
        loop {
            let pending = std::mem::take(&mut ctx.rt.needs_initial);
            if pending.is_empty() {
                break;
            }
            for ep in pending {
                let matches: Vec<Match> = match ctx.rt.endpoints.get(&ep) {
                    Some(slot) => match &slot.kind {
                        EndpointKind::Handler { pattern, .. } => ctx
                            .rt
                            .mirror
                            .iter()
                            .filter_map(|v| pattern.matches(v).map(|bindings| Match { value: v.clone(), bindings }))
                            .collect(),
                        EndpointKind::Assert { .. } => continue,
                    },
                    None => continue,
                };
                for m in matches {
                    ctx.invoke(ep, &m);
                }
            }
        }
        ctx.refresh();
        if ctx.rt.facets.is_empty() {
            ctx.env.quit();
        }
    }
}

/// Invocation list for one event: tree pre-order, then registration order,
/// then value order.
fn snapshot<'v>(
    rt: &Runtime,
    values_for: impl Fn(Trigger) -> Option<&'v std::collections::BTreeSet<Value>>,
) -> Vec<(EndpointId, Match)> {
    let mut calls = Vec::new();
    for node in rt.facets.values() {
        for ep in &node.endpoints {
            let Some(slot) = rt.endpoints.get(ep) else { continue };
            let EndpointKind::Handler { trigger, pattern, .. } = &slot.kind else { continue };
            let Some(values) = values_for(*trigger) else { continue };
            for v in values {
                if let Some(bindings) = pattern.matches(v) {
                    calls.push((*ep, Match { value: v.clone(), bindings }));
                }
            }
        }
    }
    calls
}

impl Behavior for FacetActor {
    fn handle(&mut self, event: &Event, env: &mut TurnEnv<'_>) -> Result<(), ActorError> {
        self.dispatch(event, env);
        Ok(())
    }

    fn on_crash(&mut self, _env: &mut TurnEnv<'_>) {
        // No stop handlers on a crash.
        self.rt.clear();
    }

    fn as_any(&self) -> &dyn std::any::Any {
        self
    }
}
