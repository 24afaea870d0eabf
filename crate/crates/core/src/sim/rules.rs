//! Implicit effects of appliances.

use crate::world::SceneGraph;

/// Upper bound on predicate changes made by rules within one step.
pub const MAX_FIRINGS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    /// A running sink (toggled wash source) cleans the items directly in it.
    WashUnderRunningWater,
    /// A heat source that is on (and closed, if it has a door) makes every
    /// item inside it, at any depth, hot and not cold; cookable items become
    /// cooked.
    HeatWhileOn,
    /// A closed cold source makes every item inside it cold and not hot.
    CoolWhileClosed,
    /// A dispenser that is on fills fillable items directly in it.
    FillFromDispenser,
}

fn nested_contents(scene: &SceneGraph, id: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut stack = vec![id.to_string()];
    while let Some(cur) = stack.pop() {
        for c in scene.contents_of(&cur) {
            if !out.iter().any(|o| o == c) && c != id {
                out.push(c.to_string());
                stack.push(c.to_string());
            }
        }
    }
    out.sort();
    out
}

impl Rule {
    pub const ALL: [Rule; 4] =
        [Rule::WashUnderRunningWater, Rule::HeatWhileOn, Rule::CoolWhileClosed, Rule::FillFromDispenser];

    pub fn description(self) -> &'static str {
        match self {
            Rule::WashUnderRunningWater => "items in a sink with the water running become clean",
            Rule::HeatWhileOn => "items inside a running heat source become hot, and cooked if cookable",
            Rule::CoolWhileClosed => "items inside a closed fridge become cold",
            Rule::FillFromDispenser => "a cup or mug in a running coffee machine gets filled",
        }
    }

    /// Predicate changes `(entity, predicate, value)` the rule wants to make now.
    fn proposals(self, scene: &SceneGraph) -> Vec<(String, &'static str, bool)> {
        let mut out = Vec::new();
        let items = |ids: Vec<String>| ids.into_iter().filter(|i| scene.holds(i, "pickupable")).collect::<Vec<_>>();
        for (id, e) in &scene.entities {
            match self {
                Rule::WashUnderRunningWater if e.is("washsource") && e.is("istoggled") => {
                    let direct = scene.contents_of(id).into_iter().map(str::to_string).collect();
                    for i in items(direct) {
                        out.push((i, "isclean", true));
                    }
                }
                Rule::HeatWhileOn if e.is("heatsource") && e.is("istoggled") && !(e.is("openable") && e.is("isopen")) => {
                    for i in items(nested_contents(scene, id)) {
                        if scene.holds(&i, "cookable") {
                            out.push((i.clone(), "iscooked", true));
                        }
                        out.push((i.clone(), "ishot", true));
                        out.push((i, "iscold", false));
                    }
                }
                Rule::CoolWhileClosed if e.is("coolsource") && e.is("openable") && !e.is("isopen") => {
                    for i in items(nested_contents(scene, id)) {
                        out.push((i.clone(), "iscold", true));
                        out.push((i, "ishot", false));
                    }
                }
                Rule::FillFromDispenser if e.is("dispenser") && e.is("istoggled") => {
                    let direct = scene.contents_of(id).into_iter().map(str::to_string).collect();
                    for i in items(direct) {
                        if scene.holds(&i, "fillable") {
                            out.push((i, "isfilled", true));
                        }
                    }
                }
                _ => {}
            }
        }
        out
    }

    /// Applies the rule once; returns the changes actually made.
    pub fn fire(self, scene: &mut SceneGraph) -> Vec<(String, &'static str, bool)> {
        let mut made = Vec::new();
        for (id, pred, value) in self.proposals(scene) {
            if scene.holds(&id, pred) != value && scene.set_predicate(&id, pred, value) {
                made.push((id, pred, value));
            }
        }
        made
    }
}

/// Fires `rules` until nothing changes or [`MAX_FIRINGS`] changes were made.
pub fn run_to_fixpoint(rules: &[Rule], scene: &mut SceneGraph) -> Vec<(String, &'static str, bool)> {
    let mut all = Vec::new();
    loop {
        let mut changed = false;
        for r in rules {
            let made = r.fire(scene);
            changed |= !made.is_empty();
            all.extend(made);
            if all.len() >= MAX_FIRINGS {
                tracing::warn!("implicit rules hit the firing limit");
                all.truncate(MAX_FIRINGS);
                return all;
            }
        }
        if !changed {
            return all;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{Entity, Relation, RelationKind};

    fn kitchen() -> SceneGraph {
        let mut s = SceneGraph::new();
        s.insert_entity(Entity::new("stoveburner-1", "stoveburner").with_static(&["isreceptacle", "heatsource", "toggleable"]), true);
        s.insert_entity(Entity::new("pan-1", "pan").with_static(&["pickupable", "isreceptacle"]), true);
        s.insert_entity(Entity::new("egg-1", "egg").with_static(&["pickupable", "cookable"]).with_dynamic(&["iscold"]), true);
        s.insert_entity(Entity::new("fridge-1", "fridge").with_static(&["isreceptacle", "openable", "coolsource"]), true);
        s.relations.insert(Relation::new("pan-1", RelationKind::In, "stoveburner-1"));
        s.relations.insert(Relation::new("egg-1", RelationKind::In, "pan-1"));
        s
    }

    #[test]
    fn stove_heats_through_pan() {
        let mut s = kitchen();
        assert!(run_to_fixpoint(&Rule::ALL, &mut s).is_empty());
        s.set_predicate("stoveburner-1", "istoggled", true);
        run_to_fixpoint(&Rule::ALL, &mut s);
        assert!(s.holds("egg-1", "ishot") && s.holds("egg-1", "iscooked") && !s.holds("egg-1", "iscold"));
        assert!(s.holds("pan-1", "ishot") && !s.holds("pan-1", "iscooked"));
    }

    #[test]
    fn closed_fridge_cools() {
        let mut s = kitchen();
        s.relations.clear();
        s.relations.insert(Relation::new("egg-1", RelationKind::In, "fridge-1"));
        s.set_predicate("egg-1", "ishot", true);
        s.set_predicate("fridge-1", "isopen", true);
        run_to_fixpoint(&Rule::ALL, &mut s);
        assert!(s.holds("egg-1", "ishot"));
        s.set_predicate("fridge-1", "isopen", false);
        run_to_fixpoint(&Rule::ALL, &mut s);
        assert!(s.holds("egg-1", "iscold") && !s.holds("egg-1", "ishot"));
    }
}
