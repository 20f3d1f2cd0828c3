use std::collections::{BTreeMap, HashSet};

use super::{KgError, Result};
use crate::graph::{Edge, Graph};

/// `(head, relation, tail)` indices.
pub type Triple = (usize, usize, usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Split {
    Train,
    Valid,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Valid, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Valid => "valid",
            Split::Test => "test",
        }
    }
}

impl std::str::FromStr for Split {
    type Err = KgError;

    fn from_str(s: &str) -> Result<Self> {
        Split::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| KgError::UnknownSplit(s.to_string()))
    }
}

/// Name ↔ index mapping, indices in insertion order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocab {
    names: Vec<String>,
    index: BTreeMap<String, usize>,
}

impl Vocab {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_names(names: impl IntoIterator<Item = String>) -> Self {
        let mut v = Self::new();
        for n in names {
            v.insert(&n);
        }
        v
    }

    pub fn insert(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), self.names.len() - 1);
        self.names.len() - 1
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// The vocabulary entry with the smallest edit distance to `name`.
    pub fn nearest(&self, name: &str) -> Option<&str> {
        self.names
            .iter()
            .min_by_key(|n| (edit_distance(n, name), n.as_str()))
            .map(String::as_str)
    }
}

fn edit_distance(a: &str, b: &str) -> usize {
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.chars().enumerate() {
        let mut cur = vec![i + 1; b.len() + 1];
        for (j, &cb) in b.iter().enumerate() {
            cur[j + 1] = (prev[j] + (ca != cb) as usize)
                .min(prev[j + 1] + 1)
                .min(cur[j] + 1);
        }
        prev = cur;
    }
    prev[b.len()]
}

/// Parses `head<TAB>relation<TAB>tail` lines; blank lines and `#` comments
/// are skipped.
pub fn parse_triples(text: &str) -> Result<Vec<(String, String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 || fields.iter().any(|f| f.is_empty()) {
            return Err(KgError::Parse {
                line: i + 1,
                message: format!("expected 3 tab-separated fields, found {}", fields.len()),
            });
        }
        out.push((
            fields[0].to_string(),
            fields[1].to_string(),
            fields[2].to_string(),
        ));
    }
    Ok(out)
}

pub fn write_triples(store: &TripletStore, split: Split) -> String {
    let mut out = String::new();
    for &(h, r, t) in store.split(split) {
        out.push_str(store.entities.name(h));
        out.push('\t');
        out.push_str(store.relations.name(r));
        out.push('\t');
        out.push_str(store.entities.name(t));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripletStore {
    pub entities: Vocab,
    pub relations: Vocab,
    train: Vec<Triple>,
    valid: Vec<Triple>,
    test: Vec<Triple>,
    known: HashSet<Triple>,
}

impl TripletStore {
    /// Validates index ranges, per-split uniqueness and split disjointness.
    pub fn new(
        entities: Vocab,
        relations: Vocab,
        train: Vec<Triple>,
        valid: Vec<Triple>,
        test: Vec<Triple>,
    ) -> Result<Self> {
        let mut known = HashSet::new();
        for (split, triples) in [
            (Split::Train, &train),
            (Split::Valid, &valid),
            (Split::Test, &test),
        ] {
            let mut seen = HashSet::new();
            for &(h, r, t) in triples.iter() {
                if h >= entities.len() || t >= entities.len() || r >= relations.len() {
                    return Err(KgError::TripleOutOfRange { triple: (h, r, t) });
                }
                if !seen.insert((h, r, t)) {
                    return Err(KgError::DuplicateTriple {
                        split: split.name(),
                        triple: (h, r, t),
                    });
                }
                if !known.insert((h, r, t)) {
                    return Err(KgError::OverlappingSplits { triple: (h, r, t) });
                }
            }
        }
        Ok(Self {
            entities,
            relations,
            train,
            valid,
            test,
            known,
        })
    }

    /// Builds vocabularies by first appearance over train, valid, test.
    pub fn from_named(
        train: &[(String, String, String)],
        valid: &[(String, String, String)],
        test: &[(String, String, String)],
    ) -> Result<Self> {
        let mut entities = Vocab::new();
        let mut relations = Vocab::new();
        let mut index = |rows: &[(String, String, String)]| -> Vec<Triple> {
            rows.iter()
                .map(|(h, r, t)| {
                    let h = entities.insert(h);
                    let r = relations.insert(r);
                    (h, r, entities.insert(t))
                })
                .collect()
        };
        let (train, valid, test) = (index(train), index(valid), index(test));
        Self::new(entities, relations, train, valid, test)
    }

    pub fn num_entities(&self) -> usize {
        self.entities.len()
    }

    pub fn num_relations(&self) -> usize {
        self.relations.len()
    }

    pub fn split(&self, split: Split) -> &[Triple] {
        match split {
            Split::Train => &self.train,
            Split::Valid => &self.valid,
            Split::Test => &self.test,
        }
    }

    /// Whether the triple appears in any split.
    pub fn is_known(&self, triple: Triple) -> bool {
        self.known.contains(&triple)
    }

    pub fn entity(&self, name: &str) -> Result<usize> {
        self.entities.get(name).ok_or_else(|| KgError::UnknownName {
            kind: "entity",
            name: name.to_string(),
            suggestion: self.entities.nearest(name).map(str::to_string),
        })
    }

    pub fn relation(&self, name: &str) -> Result<usize> {
        self.relations
            .get(name)
            .ok_or_else(|| KgError::UnknownName {
                kind: "relation",
                name: name.to_string(),
                suggestion: self.relations.nearest(name).map(str::to_string),
            })
    }

    /// The split as a relation-typed graph over all entities.
    pub fn to_graph(&self, split: Split) -> Graph {
        let edges: Vec<Edge> = self
            .split(split)
            .iter()
            .map(|&(h, r, t)| Edge::typed(h, t, r))
            .collect();
        Graph::builder(self.num_entities())
            .edges(edges)
            .relations(self.num_relations())
            .build()
            .expect("store indices are validated")
    }
}
