use std::collections::{btree_map, BTreeMap};

use crate::values::Value;

use super::ActorId;

#[derive(Debug, Clone, Default)]
struct Entry {
    total: usize,
    per_actor: BTreeMap<ActorId, usize>,
}

/// Owner-tracked multiset of assertions.
///
/// Observers only ever see the set view: a value is present while its total
/// count is nonzero.
#[derive(Debug, Clone, Default)]
pub struct AssertionBag {
    entries: BTreeMap<Value, Entry>,
    by_actor: BTreeMap<ActorId, BTreeMap<Value, usize>>,
}

/// Returned when an actor retracts a value it does not hold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RetractUnheld;

impl AssertionBag {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add one count; true when the value became present.
    pub fn add(&mut self, actor: ActorId, v: Value) -> bool {
        *self.by_actor.entry(actor).or_default().entry(v.clone()).or_insert(0) += 1;
        let entry = self.entries.entry(v).or_default();
        *entry.per_actor.entry(actor).or_insert(0) += 1;
        entry.total += 1;
        entry.total == 1
    }

    /// Remove one count held by `actor`; `Ok(true)` when the value vanished.
    pub fn remove(&mut self, actor: ActorId, v: &Value) -> Result<bool, RetractUnheld> {
        let Some(mine) = self.by_actor.get_mut(&actor) else {
            return Err(RetractUnheld);
        };
        let Some(count) = mine.get_mut(v) else {
            return Err(RetractUnheld);
        };
        *count -= 1;
        if *count == 0 {
            mine.remove(v);
            if mine.is_empty() {
                self.by_actor.remove(&actor);
            }
        }
        let btree_map::Entry::Occupied(mut slot) = self.entries.entry(v.clone()) else {
            unreachable!("per-actor index out of sync with entries");
        };
        let entry = slot.get_mut();
        entry.total -= 1;
        let per = entry.per_actor.get_mut(&actor).expect("owner count");
        *per -= 1;
        if *per == 0 {
            entry.per_actor.remove(&actor);
        }
        if entry.total == 0 {
            slot.remove();
            Ok(true)
        } else {
            Ok(false)
        }
    }

    /// Drop everything `actor` holds, returning the values that vanished.
    pub fn remove_actor(&mut self, actor: ActorId) -> Vec<Value> {
        let Some(mine) = self.by_actor.remove(&actor) else {
            return Vec::new();
        };
        let mut vanished = Vec::new();
        for (v, count) in mine {
            let entry = self.entries.get_mut(&v).expect("entry for owned value");
            entry.total -= count;
            entry.per_actor.remove(&actor);
            if entry.total == 0 {
                self.entries.remove(&v);
                vanished.push(v);
            }
        }
        vanished
    }

    pub fn is_present(&self, v: &Value) -> bool {
        self.entries.contains_key(v)
    }

    pub fn total(&self, v: &Value) -> usize {
        self.entries.get(v).map_or(0, |e| e.total)
    }

    pub fn count_for(&self, actor: ActorId, v: &Value) -> usize {
        self.by_actor.get(&actor).and_then(|m| m.get(v)).copied().unwrap_or(0)
    }

    /// Present values, in value order.
    pub fn present(&self) -> impl Iterator<Item = &Value> {
        self.entries.keys()
    }

    pub fn owners(&self, v: &Value) -> BTreeMap<ActorId, usize> {
        self.entries.get(v).map(|e| e.per_actor.clone()).unwrap_or_default()
    }

    /// Everything `actor` currently holds, with multiplicity.
    pub fn contributions(&self, actor: ActorId) -> BTreeMap<Value, usize> {
        self.by_actor.get(&actor).cloned().unwrap_or_default()
    }

    pub fn contributions_ref(&self, actor: ActorId) -> Option<&BTreeMap<Value, usize>> {
        self.by_actor.get(&actor)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rec;

    #[test]
    fn multiplicity_is_hidden() {
        let mut bag = AssertionBag::new();
        let a = ActorId(0);
        let v = rec!("price", 100);
        assert!(bag.add(a, v.clone()));
        assert!(!bag.add(a, v.clone()));
        assert_eq!(bag.remove(a, &v), Ok(false));
        assert!(bag.is_present(&v));
        assert_eq!(bag.remove(a, &v), Ok(true));
        assert!(bag.is_empty());
    }

    #[test]
    fn shared_values_survive_one_owner() {
        let mut bag = AssertionBag::new();
        let v = rec!("price", 100);
        bag.add(ActorId(0), v.clone());
        bag.add(ActorId(1), v.clone());
        assert_eq!(bag.remove(ActorId(0), &v), Ok(false));
        assert_eq!(bag.remove_actor(ActorId(1)), vec![v.clone()]);
        assert!(!bag.is_present(&v));
    }

    #[test]
    fn retract_unheld_leaves_bag_alone() {
        let mut bag = AssertionBag::new();
        let v = rec!("price", 100);
        bag.add(ActorId(1), v.clone());
        assert_eq!(bag.remove(ActorId(0), &v), Err(RetractUnheld));
        assert_eq!(bag.total(&v), 1);
    }
}
