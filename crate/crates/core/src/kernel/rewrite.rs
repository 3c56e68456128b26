//! Deciding path equality by oriented rewriting.
//!
//! Every equation is turned into a rule that rewrites the length-lex larger
//! side into the smaller one. A path is normalized by exploring everything
//! reachable through rule applications and keeping the least word; the walk
//! is capped by a step bound and reports an error instead of guessing when the
//! cap is hit.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use super::path::{Path, PathEquation};
use super::schema::Schema;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Rule {
    pub lhs: Path,
    pub rhs: Path,
}

pub(super) fn orient(equations: &[PathEquation]) -> Vec<Rule> {
    equations
        .iter()
        .filter_map(|eq| match eq.lhs.length_lex_cmp(&eq.rhs) {
            Ordering::Equal => None,
            Ordering::Greater => Some(Rule { lhs: eq.lhs.clone(), rhs: eq.rhs.clone() }),
            Ordering::Less => Some(Rule { lhs: eq.rhs.clone(), rhs: eq.lhs.clone() }),
        })
        .collect()
}

impl Rule {
    /// Applies the rule at every matching position of `path`.
    fn apply_all(&self, path: &Path, nodes: &[String], out: &mut Vec<Path>) {
        let k = self.lhs.steps.len();
        if k > path.steps.len() {
            return;
        }
        for i in 0..=path.steps.len() - k {
            if nodes[i] != self.lhs.source || path.steps[i..i + k] != self.lhs.steps[..] {
                continue;
            }
            let mut steps = path.steps[..i].to_vec();
            steps.extend(self.rhs.steps.iter().cloned());
            let terminal = match &self.lhs.terminal {
                Some(t) => {
                    if i + k != path.steps.len() || path.terminal.as_ref() != Some(t) {
                        continue;
                    }
                    self.rhs.terminal.clone()
                }
                None => {
                    steps.extend(path.steps[i + k..].iter().cloned());
                    path.terminal.clone()
                }
            };
            out.push(Path { source: path.source.clone(), steps, terminal });
        }
    }
}

impl Schema {
    fn rewrites_of(&self, path: &Path) -> Result<Vec<Path>> {
        let nodes = self.path_nodes(path)?;
        let mut out = Vec::new();
        for rule in &self.rules {
            rule.apply_all(path, &nodes, &mut out);
        }
        Ok(out)
    }

    /// Canonical representative of `path`: the length-lex least word reachable
    /// by applying the oriented equations, exploring at most `bound` rewrites.
    pub fn normalize_path(&self, path: &Path, bound: usize) -> Result<Path> {
        self.target(path)?;
        if self.rules.is_empty() {
            return Ok(path.clone());
        }
        let mut best = path.clone();
        let mut seen: HashSet<Path> = HashSet::from([path.clone()]);
        let mut queue = VecDeque::from([path.clone()]);
        let mut steps = 0usize;
        while let Some(p) = queue.pop_front() {
            for q in self.rewrites_of(&p)? {
                if seen.contains(&q) {
                    continue;
                }
                steps += 1;
                if steps > bound {
                    return Err(Error::NormalizationInconclusive { path: path.to_string(), bound });
                }
                if q.length_lex_cmp(&best) == Ordering::Less {
                    best = q.clone();
                }
                seen.insert(q.clone());
                queue.push_back(q);
            }
        }
        Ok(best)
    }

    /// Path equality modulo the schema's equations. Sound always; complete
    /// when the oriented rules are confluent.
    pub fn paths_equal(&self, p: &Path, q: &Path, bound: usize) -> Result<bool> {
        if self.target(p)? != self.target(q)? || p.source != q.source {
            return Err(Error::SortMismatch(format!("`{p}` and `{q}` are not parallel")));
        }
        if p == q {
            return Ok(true);
        }
        Ok(self.normalize_path(p, bound)? == self.normalize_path(q, bound)?)
    }

    /// All morphism classes (as normal forms) from `from` to `to`.
    pub fn enumerate_morphisms(&self, from: &str, to: &str, bound: usize) -> Result<Vec<Path>> {
        if !self.has_node(to) {
            return Err(Error::UnknownNode(to.to_owned()));
        }
        self.explore(from, bound)?.hom(to, bound)
    }

    /// Breadth-first enumeration of node-valued path classes out of `from`.
    ///
    /// Every new class at length `n + 1` extends a new class at length `n`, so
    /// only the newest classes are extended. The walk stops once a level adds
    /// nothing, at length `bound`, or once more than `bound` classes are known.
    pub(crate) fn explore(&self, from: &str, bound: usize) -> Result<Exploration> {
        if !self.has_node(from) {
            return Err(Error::UnknownNode(from.to_owned()));
        }
        let id = Path::id(from);
        let mut known: BTreeSet<Path> = BTreeSet::from([id.clone()]);
        let mut frontier = vec![id];
        let mut length = 0;
        while !frontier.is_empty() && length < bound && known.len() <= bound {
            length += 1;
            let mut next = Vec::new();
            for p in &frontier {
                let end = self.target_node(p)?;
                for e in self.edges_from(&end) {
                    let mut q = p.clone();
                    q.steps.push(e.name.clone());
                    let q = self.normalize_path(&q, bound)?;
                    if known.insert(q.clone()) {
                        next.push(q);
                    }
                }
            }
            frontier = next;
        }
        let mut classes: BTreeMap<String, Vec<Path>> = BTreeMap::new();
        for p in known {
            classes.entry(self.target_node(&p)?).or_default().push(p);
        }
        for v in classes.values_mut() {
            v.sort_by(|a, b| a.length_lex_cmp(b));
        }
        let open = if frontier.is_empty() {
            BTreeSet::new()
        } else {
            let ends: Result<Vec<String>> = frontier.iter().map(|p| self.target_node(p)).collect();
            self.reachable(ends?)
        };
        Ok(Exploration { source: from.to_owned(), classes, open })
    }
}

/// Result of [`Schema::explore`]: the classes found, plus the nodes that
/// unexplored extensions could still reach.
#[derive(Clone, Debug)]
pub(crate) struct Exploration {
    source: String,
    classes: BTreeMap<String, Vec<Path>>,
    open: BTreeSet<String>,
}

impl Exploration {
    /// The complete hom-set to `to`, or an error if it may be infinite.
    pub(crate) fn hom(&self, to: &str, bound: usize) -> Result<Vec<Path>> {
        if self.open.contains(to) {
            return Err(Error::InfiniteHomSet { from: self.source.clone(), to: to.to_owned(), bound });
        }
        Ok(self.classes.get(to).cloned().unwrap_or_default())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{BaseType, DEFAULT_PATH_BOUND};

    fn idempotent_loop() -> Schema {
        Schema::builder("L")
            .node("A")
            .edge("f", "A", "A")
            .equation_dotted("A.f.f", "A.f")
            .build()
            .unwrap()
    }

    /// Equivalence class of `p` under the symmetric closure of the equations,
    /// restricted to words of length at most `max_len`.
    fn class_by_bfs(s: &Schema, p: &Path, max_len: usize) -> BTreeSet<Path> {
        let mut seen = BTreeSet::from([p.clone()]);
        let mut queue = VecDeque::from([p.clone()]);
        let both_ways: Vec<Rule> = s
            .equations()
            .iter()
            .flat_map(|e| {
                [
                    Rule { lhs: e.lhs.clone(), rhs: e.rhs.clone() },
                    Rule { lhs: e.rhs.clone(), rhs: e.lhs.clone() },
                ]
            })
            .collect();
        while let Some(w) = queue.pop_front() {
            let nodes = s.path_nodes(&w).unwrap();
            let mut out = Vec::new();
            for r in &both_ways {
                r.apply_all(&w, &nodes, &mut out);
            }
            for q in out {
                if q.len() <= max_len && seen.insert(q.clone()) {
                    queue.push_back(q);
                }
            }
        }
        seen
    }

    #[test]
    fn single_rewrite() {
        let s = Schema::builder("X")
            .node("A")
            .node("B")
            .node("C")
            .edge("f", "A", "B")
            .edge("g", "B", "C")
            .edge("h", "A", "C")
            .equation_dotted("A.f.g", "A.h")
            .build()
            .unwrap();
        let fg = s.parse_path("A.f.g").unwrap();
        assert_eq!(s.normalize_path(&fg, 512).unwrap(), s.parse_path("A.h").unwrap());
    }

    #[test]
    fn free_category_is_already_normal() {
        let s = Schema::builder("S").node("M").edge("parent", "M", "M").build().unwrap();
        let pp = s.parse_path("M.parent.parent").unwrap();
        assert_eq!(s.normalize_path(&pp, 512).unwrap(), pp);
    }

    #[test]
    fn idempotent_loop_normalizes_to_least_class_member() {
        let s = idempotent_loop();
        let fff = s.parse_path("A.f.f.f").unwrap();
        let nf = s.normalize_path(&fff, 512).unwrap();
        // oracle: least element of the BFS equivalence class
        let least = class_by_bfs(&s, &fff, 6)
            .into_iter()
            .min_by(|a, b| a.length_lex_cmp(b))
            .unwrap();
        assert_eq!(least, s.parse_path("A.f").unwrap());
        assert_eq!(nf, least);
    }

    #[test]
    fn paths_equal_basics() {
        let s = Schema::builder("X")
            .node("A")
            .node("B")
            .edge("f", "A", "B")
            .edge("g", "A", "B")
            .build()
            .unwrap();
        let f = s.parse_path("A.f").unwrap();
        let g = s.parse_path("A.g").unwrap();
        assert!(s.paths_equal(&f, &f, 8).unwrap());
        assert!(!s.paths_equal(&f, &g, 8).unwrap());
        let s2 = Schema::builder("X")
            .node("A")
            .node("B")
            .edge("f", "A", "B")
            .edge("g", "A", "B")
            .equation_dotted("A.f", "A.g")
            .build()
            .unwrap();
        assert!(s2.paths_equal(&f, &g, 8).unwrap());
    }

    #[test]
    fn attribute_equations_rewrite_terminals() {
        let s = Schema::builder("X")
            .node("A")
            .node("B")
            .edge("f", "A", "B")
            .attribute("a", "A", BaseType::String)
            .attribute("b", "B", BaseType::String)
            .equation_dotted("A.f.b", "A.a")
            .build()
            .unwrap();
        let p = s.parse_path("A.f.b").unwrap();
        assert_eq!(s.normalize_path(&p, 8).unwrap(), s.parse_path("A.a").unwrap());
    }

    #[test]
    fn inconclusive_names_the_bound() {
        // a.b -> c, b.a -> d overlap; exploring needs more than one step
        let s = Schema::builder("X")
            .node("A")
            .edge("a", "A", "A")
            .edge("b", "A", "A")
            .edge("c", "A", "A")
            .equation_dotted("A.a.b", "A.c")
            .equation_dotted("A.b.a", "A.c")
            .build()
            .unwrap();
        let p = s.parse_path("A.a.b.a.b.a").unwrap();
        match s.normalize_path(&p, 1) {
            Err(Error::NormalizationInconclusive { bound, .. }) => assert_eq!(bound, 1),
            other => panic!("expected inconclusive, got {other:?}"),
        }
        assert!(s.normalize_path(&p, DEFAULT_PATH_BOUND).is_ok());
    }

    #[test]
    fn morphism_enumeration() {
        let discrete = Schema::builder("D").node("a").node("b").build().unwrap();
        assert!(discrete.enumerate_morphisms("a", "b", 16).unwrap().is_empty());

        let free = Schema::builder("S").node("M").edge("parent", "M", "M").build().unwrap();
        for bound in [1, 4, 64] {
            assert!(matches!(
                free.enumerate_morphisms("M", "M", bound),
                Err(Error::InfiniteHomSet { .. })
            ));
        }

        let s = idempotent_loop();
        let homs = s.enumerate_morphisms("A", "A", 16).unwrap();
        assert_eq!(homs, vec![Path::id("A"), s.parse_path("A.f").unwrap()]);
    }

    #[test]
    fn finite_target_is_not_spoiled_by_an_unrelated_loop() {
        let s = Schema::builder("X")
            .node("A")
            .node("B")
            .node("C")
            .edge("f", "A", "B")
            .edge("g", "A", "C")
            .edge("l", "C", "C")
            .build()
            .unwrap();
        assert_eq!(s.enumerate_morphisms("A", "B", 8).unwrap().len(), 1);
        assert!(s.enumerate_morphisms("A", "C", 8).is_err());
    }

    #[test]
    fn normalization_agrees_with_class_oracle() {
        // confluent: f.f = f and g.f = g on a single node, words up to length 4
        let s = Schema::builder("X")
            .node("A")
            .edge("f", "A", "A")
            .edge("g", "A", "A")
            .equation_dotted("A.f.f", "A.f")
            .equation_dotted("A.g.f", "A.g")
            .build()
            .unwrap();
        let mut words = vec![Path::id("A")];
        for _ in 0..4 {
            let mut next = words.clone();
            for w in &words {
                for e in ["f", "g"] {
                    let mut x = w.clone();
                    x.steps.push(e.into());
                    next.push(x);
                }
            }
            next.sort();
            next.dedup();
            words = next;
        }
        for p in &words {
            for q in &words {
                let oracle = class_by_bfs(&s, p, 6).contains(q);
                assert_eq!(s.paths_equal(p, q, 512).unwrap(), oracle, "{p} vs {q}");
            }
        }
    }
}
