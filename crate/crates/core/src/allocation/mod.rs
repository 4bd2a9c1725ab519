//! Regular balanced d-choice storage allocations.
//!
//! Objects and nodes are 0-based and every index arithmetic is taken modulo
//! `n` (or `k` for objects). A service choice is a set of nodes: a single
//! node for a replica, or `r` nodes that jointly rebuild the object from an
//! exact copy plus an r-XOR.

mod bibd;
mod builders;
mod matrices;

pub use bibd::{build_block_design, planar_difference_set};
pub use builders::{build_clustering, build_cyclic, build_cyclic_xor, build_single_choice};
pub use matrices::AllocationMatrices;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AllocationKind {
    SingleChoice,
    Clustering,
    Cyclic,
    BlockDesign,
    CyclicXor,
    Custom,
}

impl AllocationKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            AllocationKind::SingleChoice => "single_choice",
            AllocationKind::Clustering => "clustering",
            AllocationKind::Cyclic => "cyclic",
            AllocationKind::BlockDesign => "block_design",
            AllocationKind::CyclicXor => "cyclic_xor",
            AllocationKind::Custom => "custom",
        }
    }
}

impl fmt::Display for AllocationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for AllocationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "single_choice" => AllocationKind::SingleChoice,
            "clustering" => AllocationKind::Clustering,
            "cyclic" => AllocationKind::Cyclic,
            "block_design" => AllocationKind::BlockDesign,
            "cyclic_xor" => AllocationKind::CyclicXor,
            "custom" => AllocationKind::Custom,
            other => return Err(Error::invalid(format!("unknown allocation kind `{other}`"))),
        })
    }
}

/// One stored copy on a node: an exact object or the XOR of several objects.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StoredItem {
    Exact(usize),
    Xor(Vec<usize>),
}

impl StoredItem {
    fn objects(&self) -> &[usize] {
        match self {
            StoredItem::Exact(o) => std::slice::from_ref(o),
            StoredItem::Xor(objs) => objs,
        }
    }
}

/// An assignment of service choices to objects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawAllocation")]
pub struct Allocation {
    n: usize,
    k: usize,
    d: usize,
    r: usize,
    kind: AllocationKind,
    recovery_sets: Vec<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    contents: Option<Vec<Vec<StoredItem>>>,
}

#[derive(Deserialize)]
struct RawAllocation {
    n: usize,
    k: usize,
    d: usize,
    r: usize,
    kind: AllocationKind,
    recovery_sets: Vec<Vec<Vec<usize>>>,
    #[serde(default)]
    contents: Option<Vec<Vec<StoredItem>>>,
}

impl TryFrom<RawAllocation> for Allocation {
    type Error = Error;

    fn try_from(raw: RawAllocation) -> Result<Self> {
        let mut alloc = Allocation::custom(raw.n, raw.k, raw.d, raw.r, raw.recovery_sets)?;
        alloc.kind = raw.kind;
        if let Some(contents) = raw.contents {
            alloc = alloc.with_contents(contents)?;
        }
        Ok(alloc)
    }
}

impl Allocation {
    /// Builds an allocation from explicit recovery sets.
    ///
    /// Only structural problems (empty system, node index out of range,
    /// wrong object count, empty recovery set) are rejected here; balance and
    /// disjointness are reported by [`validate_regular_balanced`].
    pub fn custom(
        n: usize,
        k: usize,
        d: usize,
        r: usize,
        recovery_sets: Vec<Vec<Vec<usize>>>,
    ) -> Result<Self> {
        if n == 0 || k == 0 || d == 0 || r == 0 {
            return Err(Error::invalid("n, k, d and r must all be positive"));
        }
        if recovery_sets.len() != k {
            return Err(Error::invalid(format!(
                "expected recovery sets for {k} objects, got {}",
                recovery_sets.len()
            )));
        }
        for (object, choices) in recovery_sets.iter().enumerate() {
            if choices.is_empty() {
                return Err(Error::invalid(format!("object {object} has no service choice")));
            }
            for (choice, set) in choices.iter().enumerate() {
                if set.is_empty() {
                    return Err(Error::invalid(format!(
                        "object {object} choice {choice} is an empty node set"
                    )));
                }
                if let Some(node) = set.iter().find(|&&v| v >= n) {
                    return Err(Error::invalid(format!(
                        "object {object} choice {choice} names node {node} outside [0, {n})"
                    )));
                }
            }
        }
        Ok(Self {
            n,
            k,
            d,
            r,
            kind: AllocationKind::Custom,
            recovery_sets,
            contents: None,
        })
    }

    pub(crate) fn with_kind(mut self, kind: AllocationKind) -> Self {
        self.kind = kind;
        self
    }

    /// Attaches the per-node stored copies, used to check XOR decodability.
    pub fn with_contents(mut self, contents: Vec<Vec<StoredItem>>) -> Result<Self> {
        if contents.len() != self.n {
            return Err(Error::invalid(format!(
                "contents list {} nodes, allocation has {}",
                contents.len(),
                self.n
            )));
        }
        for items in &contents {
            for item in items {
                if let Some(o) = item.objects().iter().find(|&&o| o >= self.k) {
                    return Err(Error::invalid(format!("stored item names object {o} outside [0, {})", self.k)));
                }
            }
        }
        self.contents = Some(contents);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn kind(&self) -> AllocationKind {
        self.kind
    }

    pub fn recovery_sets(&self) -> &[Vec<Vec<usize>>] {
        &self.recovery_sets
    }

    pub fn contents(&self) -> Option<&[Vec<StoredItem>]> {
        self.contents.as_deref()
    }

    /// True when every service choice is a single node.
    pub fn is_replica(&self) -> bool {
        self.recovery_sets
            .iter()
            .flatten()
            .all(|set| set.len() == 1)
    }

    /// Union of the nodes that can serve `object`.
    pub fn choice_union(&self, object: usize) -> BTreeSet<usize> {
        self.recovery_sets[object].iter().flatten().copied().collect()
    }

    /// Objects held by each node, ordered by choice index and then object.
    ///
    /// For replica layouts this is the node's storage; for XOR layouts it
    /// lists the objects whose recovery sets touch the node.
    pub fn node_contents(&self) -> Vec<Vec<usize>> {
        let mut entries: Vec<Vec<(usize, usize)>> = vec![Vec::new(); self.n];
        for (object, choices) in self.recovery_sets.iter().enumerate() {
            for (choice, set) in choices.iter().enumerate() {
                for &node in set {
                    entries[node].push((choice, object));
                }
            }
        }
        entries
            .into_iter()
            .map(|mut e| {
                e.sort_unstable();
                e.into_iter().map(|(_, o)| o).collect()
            })
            .collect()
    }

    /// Number of (object, choice) memberships on each node; the row sums of `M`.
    pub fn node_memberships(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n];
        for set in self.recovery_sets.iter().flatten() {
            for &node in set {
                counts[node] += 1;
            }
        }
        counts
    }

    pub fn to_matrices(&self) -> AllocationMatrices {
        AllocationMatrices::from_allocation(self)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }
}

/// Builds a named design. Single choice uses `m = k / n` objects per node;
/// the other kinds need `k = n`, and a block design needs `n = d^2 - d + 1`.
pub fn build_allocation(
    kind: AllocationKind,
    n: usize,
    k: usize,
    d: usize,
    r: usize,
) -> Result<Allocation> {
    let square = || {
        if k == n {
            Ok(())
        } else {
            Err(Error::invalid(format!("{kind} needs k = n, got n={n} k={k}")))
        }
    };
    match kind {
        AllocationKind::SingleChoice => {
            if n == 0 || !k.is_multiple_of(n) {
                return Err(Error::invalid(format!("single_choice needs n dividing k, got n={n} k={k}")));
            }
            build_single_choice(n, k / n)
        }
        AllocationKind::Clustering => {
            square()?;
            build_clustering(n, d)
        }
        AllocationKind::Cyclic => {
            square()?;
            build_cyclic(n, d)
        }
        AllocationKind::BlockDesign => {
            square()?;
            let alloc = build_block_design(d)?;
            if alloc.n() != n {
                return Err(Error::invalid(format!(
                    "a {d}-choice block design has n = {}, got n={n}",
                    alloc.n()
                )));
            }
            Ok(alloc)
        }
        AllocationKind::CyclicXor => {
            square()?;
            build_cyclic_xor(n, d, r)
        }
        AllocationKind::Custom => Err(Error::invalid("custom allocations are loaded from a file")),
    }
}

/// A departure from the regular balanced d-choice structure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    ChoiceCount { object: usize, expected: usize, found: usize },
    RecoverySetSize { object: usize, choice: usize, expected: usize, found: usize },
    OverlappingChoices { object: usize, node: usize },
    NotBalanceable { total: usize, n: usize },
    Unbalanced { node: usize, copies: usize, expected: usize },
    UnevenStorage { node: usize, items: usize, total: usize, n: usize },
    Undecodable { object: usize, choice: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ChoiceCount { object, expected, found } => {
                write!(f, "object {object} has {found} choices, expected {expected}")
            }
            Violation::RecoverySetSize { object, choice, expected, found } => write!(
                f,
                "object {object} choice {choice} spans {found} nodes, expected {expected}"
            ),
            Violation::OverlappingChoices { object, node } => {
                write!(f, "object {object} appears more than once on node {node}")
            }
            Violation::NotBalanceable { total, n } => {
                write!(f, "{total} choice memberships cannot spread evenly over {n} nodes")
            }
            Violation::Unbalanced { node, copies, expected } => {
                write!(f, "node {node} serves {copies} choices, expected {expected}")
            }
            Violation::UnevenStorage { node, items, total, n } => {
                write!(f, "node {node} stores {items} items, not an even share of {total} over {n} nodes")
            }
            Violation::Undecodable { object, choice } => {
                write!(f, "object {object} cannot be rebuilt from choice {choice}")
            }
        }
    }
}

/// Lists every way `alloc` fails to be a regular balanced d-choice allocation.
pub fn validate_regular_balanced(alloc: &Allocation) -> Vec<Violation> {
    let mut out = Vec::new();
    for (object, choices) in alloc.recovery_sets.iter().enumerate() {
        if choices.len() != alloc.d {
            out.push(Violation::ChoiceCount {
                object,
                expected: alloc.d,
                found: choices.len(),
            });
        }
        for (choice, set) in choices.iter().enumerate() {
            let expected = if choice == 0 { 1 } else { alloc.r };
            if set.len() != expected {
                out.push(Violation::RecoverySetSize {
                    object,
                    choice,
                    expected,
                    found: set.len(),
                });
            }
        }
        let mut seen = BTreeSet::new();
        let mut reported = BTreeSet::new();
        for &node in choices.iter().flatten() {
            if !seen.insert(node) && reported.insert(node) {
                out.push(Violation::OverlappingChoices { object, node });
            }
        }
    }

    let total = alloc.k * (1 + alloc.r * (alloc.d - 1));
    if !total.is_multiple_of(alloc.n) {
        out.push(Violation::NotBalanceable { total, n: alloc.n });
    } else {
        let expected = total / alloc.n;
        for (node, copies) in alloc.node_memberships().into_iter().enumerate() {
            if copies != expected {
                out.push(Violation::Unbalanced { node, copies, expected });
            }
        }
    }

    if let Some(contents) = &alloc.contents {
        let total_items: usize = contents.iter().map(Vec::len).sum();
        for (node, items) in contents.iter().enumerate() {
            if items.len() * alloc.n != total_items {
                out.push(Violation::UnevenStorage {
                    node,
                    items: items.len(),
                    total: total_items,
                    n: alloc.n,
                });
            }
        }
        for (object, choices) in alloc.recovery_sets.iter().enumerate() {
            for (choice, set) in choices.iter().enumerate() {
                if !decodes(contents, set, object) {
                    out.push(Violation::Undecodable { object, choice });
                }
            }
        }
    }
    out
}

// A node set rebuilds `object` when picking one stored item per node and
// XOR-ing them leaves exactly `object`.
fn decodes(contents: &[Vec<StoredItem>], set: &[usize], object: usize) -> bool {
    fn search(
        contents: &[Vec<StoredItem>],
        set: &[usize],
        acc: &mut BTreeSet<usize>,
        object: usize,
    ) -> bool {
        let Some((&node, rest)) = set.split_first() else {
            return acc.len() == 1 && acc.contains(&object);
        };
        for item in &contents[node] {
            let mut next = acc.clone();
            for &o in item.objects() {
                if !next.insert(o) {
                    next.remove(&o);
                }
            }
            if search(contents, rest, &mut next, object) {
                return true;
            }
        }
        false
    }
    search(contents, set, &mut BTreeSet::new(), object)
}

/// `Σ_i Σ_{j≠i} |C_i ∩ C_j|` over the choice unions of a replica allocation.
pub fn overlap_sum(alloc: &Allocation) -> Result<usize> {
    if alloc.r != 1 {
        return Err(Error::unsupported("the overlap identity is stated for replica allocations"));
    }
    // |C_i ∩ C_j| counts nodes hosting both, so sum c(c-1) over node host counts c.
    let mut hosts = vec![BTreeSet::new(); alloc.n];
    for object in 0..alloc.k {
        for node in alloc.choice_union(object) {
            hosts[node].insert(object);
        }
    }
    Ok(hosts.iter().map(|h| h.len() * h.len().saturating_sub(1)).sum())
}

/// Size of the union of all choice nodes of `objects`.
pub fn node_expansion(alloc: &Allocation, objects: &[usize]) -> Result<usize> {
    let mut nodes = BTreeSet::new();
    for &o in objects {
        if o >= alloc.k {
            return Err(Error::invalid(format!("object {o} outside [0, {})", alloc.k)));
        }
        nodes.extend(alloc.recovery_sets[o].iter().flatten().copied());
    }
    Ok(nodes.len())
}

fn circular_distance(i: usize, j: usize, k: usize) -> usize {
    let diff = i.abs_diff(j);
    diff.min(k - diff)
}

/// True when objects further than `r` apart on the index circle never share a node.
pub fn is_r_gap(alloc: &Allocation, r: usize) -> bool {
    overlapping_pairs(alloc)
        .into_iter()
        .all(|(i, j, _)| circular_distance(i, j, alloc.k) <= r)
}

/// Smallest `r` for which [`is_r_gap`] holds.
pub fn r_gap_radius(alloc: &Allocation) -> usize {
    overlapping_pairs(alloc)
        .into_iter()
        .map(|(i, j, _)| circular_distance(i, j, alloc.k))
        .max()
        .unwrap_or(0)
}

// Object pairs i < j with a non-empty choice overlap, and the overlap size.
fn overlapping_pairs(alloc: &Allocation) -> Vec<(usize, usize, usize)> {
    let mut hosts: Vec<Vec<usize>> = vec![Vec::new(); alloc.n];
    for object in 0..alloc.k {
        for node in alloc.choice_union(object) {
            hosts[node].push(object);
        }
    }
    let mut shared: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for objs in &hosts {
        for (a, &i) in objs.iter().enumerate() {
            for &j in &objs[a + 1..] {
                *shared.entry((i.min(j), i.max(j))).or_default() += 1;
            }
        }
    }
    shared.into_iter().map(|((i, j), c)| (i, j, c)).collect()
}

/// Histogram of `|C_i ∩ C_j|` over all unordered object pairs.
pub fn pairwise_overlap_histogram(alloc: &Allocation) -> BTreeMap<usize, usize> {
    let pairs = overlapping_pairs(alloc);
    let mut hist = BTreeMap::new();
    let total_pairs = alloc.k * (alloc.k - 1) / 2;
    let nonzero = pairs.len();
    for (_, _, c) in pairs {
        *hist.entry(c).or_insert(0) += 1;
    }
    if total_pairs > nonzero {
        hist.insert(0, total_pairs - nonzero);
    }
    hist
}

/// Outcome of the Hall-condition check behind the batch-code property.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HallCheck {
    pub matching_size: usize,
    pub objects: usize,
    pub satisfied: bool,
}

/// Checks `|N(S)| >= |S|` for every object set `S` through a maximum matching
/// of objects to choice nodes; by Hall's theorem the condition holds exactly
/// when the matching saturates every object.
pub fn hall_check(alloc: &Allocation) -> HallCheck {
    let adj: Vec<Vec<usize>> = (0..alloc.k)
        .map(|o| alloc.choice_union(o).into_iter().collect())
        .collect();
    let mut owner: Vec<Option<usize>> = vec![None; alloc.n];

    fn augment(
        o: usize,
        adj: &[Vec<usize>],
        owner: &mut [Option<usize>],
        visited: &mut [bool],
    ) -> bool {
        for &v in &adj[o] {
            if visited[v] {
                continue;
            }
            visited[v] = true;
            if owner[v].is_none_or(|other| augment(other, adj, owner, visited)) {
                owner[v] = Some(o);
                return true;
            }
        }
        false
    }

    let mut matching_size = 0;
    for o in 0..alloc.k {
        let mut visited = vec![false; alloc.n];
        if augment(o, &adj, &mut owner, &mut visited) {
            matching_size += 1;
        }
    }
    HallCheck {
        matching_size,
        objects: alloc.k,
        satisfied: matching_size == alloc.k,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Brute-force oracle over every object pair.
    fn r_gap_oracle(alloc: &Allocation, r: usize) -> bool {
        for i in 0..alloc.k() {
            for j in i + 1..alloc.k() {
                let dist = (j - i).min(alloc.k() - (j - i));
                let ci = alloc.choice_union(i);
                let cj = alloc.choice_union(j);
                if dist > r && ci.intersection(&cj).next().is_some() {
                    return false;
                }
            }
        }
        true
    }

    // Exhaustive Hall check over all 2^k object subsets.
    fn hall_oracle(alloc: &Allocation) -> bool {
        let k = alloc.k();
        (1u32..(1 << k)).all(|mask| {
            let objs: Vec<usize> = (0..k).filter(|i| mask >> i & 1 == 1).collect();
            node_expansion(alloc, &objs).unwrap() >= objs.len()
        })
    }

    #[test]
    fn overlap_identity_for_builders() {
        let cases = [
            build_cyclic(7, 3).unwrap(),
            build_clustering(9, 3).unwrap(),
            build_cyclic(100, 2).unwrap(),
            build_cyclic(100, 5).unwrap(),
            build_single_choice(5, 1).unwrap(),
            build_block_design(3).unwrap(),
            build_block_design(5).unwrap(),
        ];
        for a in &cases {
            assert_eq!(
                overlap_sum(a).unwrap(),
                (a.d() - 1) * a.d() * a.k(),
                "{} n={} d={}",
                a.kind(),
                a.n(),
                a.d()
            );
        }
        assert_eq!(overlap_sum(&build_cyclic(7, 3).unwrap()).unwrap(), 42);
        assert_eq!(overlap_sum(&build_clustering(9, 3).unwrap()).unwrap(), 54);
        assert_eq!(overlap_sum(&build_block_design(3).unwrap()).unwrap(), 42);
        assert!(overlap_sum(&build_cyclic_xor(7, 3, 2).unwrap()).is_err());
    }

    #[test]
    fn node_expansion_examples() {
        let a = build_cyclic(7, 3).unwrap();
        assert_eq!(node_expansion(&a, &[0]).unwrap(), 3);
        assert_eq!(node_expansion(&a, &[0, 1]).unwrap(), 4);
        assert!(node_expansion(&a, &[7]).is_err());
        for n in [7, 12] {
            for d in 1..=4 {
                let a = build_cyclic(n, d).unwrap();
                let r = d - 1;
                for start in 0..n {
                    for x in 1..=n {
                        let objs: Vec<usize> = (0..x).map(|t| (start + t) % n).collect();
                        let e = node_expansion(&a, &objs).unwrap();
                        assert!(x <= e && e <= x + 2 * r);
                    }
                }
            }
        }
    }

    #[test]
    fn r_gap_matches_enumeration() {
        for n in [5, 7, 12, 13] {
            for d in 1..=n.min(5) {
                let a = build_cyclic(n, d).unwrap();
                for r in 0..n / 2 + 1 {
                    assert_eq!(is_r_gap(&a, r), r_gap_oracle(&a, r), "n={n} d={d} r={r}");
                }
                assert!(is_r_gap(&a, d - 1));
                if d >= 2 && 2 * (d - 1) < n {
                    assert!(!is_r_gap(&a, d - 2));
                }
            }
        }
        let c = build_clustering(9, 3).unwrap();
        assert!(is_r_gap(&c, 2));
        assert!(r_gap_oracle(&c, 2));
        let b = build_block_design(3).unwrap();
        for r in 0..3 {
            assert!(!is_r_gap(&b, r));
            assert!(!r_gap_oracle(&b, r));
        }
        assert_eq!(r_gap_radius(&b), 3);
        assert_eq!(r_gap_radius(&build_cyclic(7, 3).unwrap()), 2);
    }

    #[test]
    fn hall_condition_holds_for_builders() {
        let cases = [
            build_cyclic(7, 3).unwrap(),
            build_clustering(9, 3).unwrap(),
            build_clustering(12, 4).unwrap(),
            build_single_choice(4, 1).unwrap(),
            build_block_design(3).unwrap(),
            build_cyclic(12, 1).unwrap(),
        ];
        for a in &cases {
            assert!(hall_oracle(a));
            assert!(hall_check(a).satisfied);
        }
        // Several objects per node can never all be read at once.
        let crowded = build_single_choice(4, 3).unwrap();
        assert!(!hall_oracle(&crowded));
        assert_eq!(hall_check(&crowded).matching_size, 4);
        for a in [build_cyclic(100, 3).unwrap(), build_block_design(5).unwrap()] {
            assert!(hall_check(&a).satisfied);
        }
    }

    #[test]
    fn hall_check_detects_crowding() {
        // Three objects squeezed onto two nodes.
        let a = Allocation::custom(3, 3, 1, 1, vec![vec![vec![0]], vec![vec![1]], vec![vec![0]]]).unwrap();
        assert!(!hall_oracle(&a));
        let h = hall_check(&a);
        assert!(!h.satisfied);
        assert_eq!(h.matching_size, 2);
    }

    #[test]
    fn validation_accepts_builders() {
        for a in [
            build_cyclic(7, 3).unwrap(),
            build_block_design(3).unwrap(),
            build_clustering(9, 3).unwrap(),
            build_single_choice(2, 2).unwrap(),
            build_cyclic_xor(7, 3, 2).unwrap(),
            build_cyclic_xor(6, 2, 2).unwrap(),
            build_cyclic_xor(3, 2, 2).unwrap(),
        ] {
            assert_eq!(validate_regular_balanced(&a), vec![], "{}", a.kind());
        }
    }

    #[test]
    fn validation_reports_deleted_copy() {
        let a = build_cyclic(7, 3).unwrap();
        let mut sets = a.recovery_sets().to_vec();
        sets[0].pop(); // object 0 loses its replica on node 2
        let tampered = Allocation::custom(7, 7, 3, 1, sets).unwrap();
        let v = validate_regular_balanced(&tampered);
        assert!(v.contains(&Violation::ChoiceCount { object: 0, expected: 3, found: 2 }));
        assert!(v.contains(&Violation::Unbalanced { node: 2, copies: 2, expected: 3 }));
        assert_eq!(v.len(), 2);
    }

    #[test]
    fn validation_reports_duplicate_object_on_node() {
        let a = build_cyclic(7, 3).unwrap();
        let mut sets = a.recovery_sets().to_vec();
        sets[0][2] = vec![1];
        let tampered = Allocation::custom(7, 7, 3, 1, sets).unwrap();
        let v = validate_regular_balanced(&tampered);
        assert!(v.contains(&Violation::OverlappingChoices { object: 0, node: 1 }));
    }

    #[test]
    fn custom_rejects_structural_errors() {
        assert!(Allocation::custom(3, 2, 1, 1, vec![vec![vec![0]]]).is_err());
        assert!(Allocation::custom(3, 1, 1, 1, vec![vec![vec![3]]]).is_err());
        assert!(Allocation::custom(3, 1, 1, 1, vec![vec![vec![]]]).is_err());
        assert!(Allocation::custom(0, 1, 1, 1, vec![vec![vec![0]]]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let a = build_cyclic_xor(7, 3, 2).unwrap();
        let text = a.to_json_string().unwrap();
        assert_eq!(Allocation::from_json_str(&text).unwrap(), a);
        let b = build_block_design(3).unwrap();
        assert_eq!(Allocation::from_json_str(&b.to_json_string().unwrap()).unwrap(), b);
        let bad = r#"{"n": 2, "k": 1, "d": 1, "r": 1, "kind": "custom", "recovery_sets": [[[5]]]}"#;
        assert!(Allocation::from_json_str(bad).is_err());
    }

    #[test]
    fn block_design_overlap_histogram() {
        let b = build_block_design(3).unwrap();
        let hist = pairwise_overlap_histogram(&b);
        assert_eq!(hist, BTreeMap::from([(1, 21)]));
        let c = build_cyclic(7, 3).unwrap();
        let hist = pairwise_overlap_histogram(&c);
        // Each object overlaps its 2 neighbours on each side: 7 pairs at distance 1
        // share 2 nodes, 7 pairs at distance 2 share 1, the remaining 7 share none.
        assert_eq!(hist, BTreeMap::from([(0, 7), (1, 7), (2, 7)]));
    }
}
