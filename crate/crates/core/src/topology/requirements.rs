use std::collections::BTreeSet;

use nalgebra::DMatrix;
use serde::Serialize;

use super::pattern::ClusterPattern;
use super::{links_of, STRUCT_TOL};

/// Everything the design rules look at. Nodes are 0-based and may include
/// control nodes appended after the network nodes.
#[derive(Debug, Clone)]
pub struct RequirementInput {
    /// Weighted coupling per symbol over all nodes; off-diagonal entries
    /// define links.
    pub couplings: Vec<DMatrix<f64>>,
    /// Cluster pattern per symbol over all nodes.
    pub patterns: Vec<ClusterPattern>,
    pub transmitter: Vec<usize>,
    pub receiver: Vec<usize>,
    /// Links the transmitter is allowed to switch.
    pub control_links: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RequirementCheck {
    pub id: &'static str,
    pub description: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RequirementReport {
    pub checks: Vec<RequirementCheck>,
    /// Links joining the transmitter and receiver sides (0-based, `i < j`).
    pub channel_links: Vec<(usize, usize)>,
}

impl RequirementReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&RequirementCheck> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn summary(&self) -> String {
        self.failures()
            .iter()
            .map(|c| format!("{} ({}): {}", c.id, c.description, c.detail))
            .collect::<Vec<_>>()
            .join("; ")
    }
}

fn check(id: &'static str, description: &'static str, bad: Vec<String>) -> RequirementCheck {
    RequirementCheck { id, description, passed: bad.is_empty(), detail: bad.join(", ") }
}

fn fmt_link((i, j): (usize, usize)) -> String {
    format!("l{}-{}", i + 1, j + 1)
}

fn norm(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Evaluates the four design rules plus the node-partition precondition:
///
/// - `partition`: transmitter and receiver sets partition the nodes;
/// - `i`: more than one symbol;
/// - `ii`: patterns pairwise distinct, and every link that changes between
///   symbols is a designated control link;
/// - `iii`: the two ends of every channel link never share a cluster;
/// - `iv`: every link that changes between symbols lies inside the transmitter.
pub fn check_requirements(input: &RequirementInput) -> RequirementReport {
    let n = input.couplings.first().map_or(0, |m| m.nrows());
    let mut checks = Vec::new();

    let mut bad = Vec::new();
    let t: BTreeSet<usize> = input.transmitter.iter().copied().collect();
    let r: BTreeSet<usize> = input.receiver.iter().copied().collect();
    for i in t.intersection(&r) {
        bad.push(format!("node {} on both sides", i + 1));
    }
    for i in 0..n {
        if !t.contains(&i) && !r.contains(&i) {
            bad.push(format!("node {} on neither side", i + 1));
        }
    }
    if let Some(i) = t.iter().chain(r.iter()).find(|&&i| i >= n) {
        bad.push(format!("node {} out of range", i + 1));
    }
    if input.couplings.iter().any(|m| m.nrows() != n || m.ncols() != n)
        || input.patterns.iter().any(|p| p.n() != n)
        || input.patterns.len() != input.couplings.len()
    {
        bad.push("per-symbol matrices or patterns have inconsistent sizes".into());
    }
    let consistent = bad.is_empty();
    checks.push(check("partition", "transmitter and receiver partition the nodes", bad));

    let m = input.patterns.len();
    let bad = if m > 1 { vec![] } else { vec![format!("capacity M = {m}")] };
    checks.push(check("i", "more than one cluster pattern", bad));

    if !consistent {
        return RequirementReport { checks, channel_links: Vec::new() };
    }

    let mut all_links = BTreeSet::new();
    for c in &input.couplings {
        all_links.extend(links_of(c));
    }
    let mut changing = BTreeSet::new();
    for &(i, j) in &all_links {
        let w0 = input.couplings[0][(i, j)];
        let v0 = input.couplings[0][(j, i)];
        if input.couplings.iter().any(|c| (c[(i, j)] - w0).abs() > STRUCT_TOL || (c[(j, i)] - v0).abs() > STRUCT_TOL) {
            changing.insert((i, j));
        }
    }

    let mut bad = Vec::new();
    for a in 0..m {
        for b in a + 1..m {
            if input.patterns[a].same_partition(&input.patterns[b]) {
                bad.push(format!("symbols {a} and {b} share pattern {}", input.patterns[a]));
            }
        }
    }
    let control: BTreeSet<(usize, usize)> = input.control_links.iter().map(|&(a, b)| norm(a, b)).collect();
    for &l in &changing {
        if !control.contains(&l) {
            bad.push(format!("{} changes but is not a control link", fmt_link(l)));
        }
    }
    checks.push(check("ii", "distinct patterns reached through control parameters only", bad));

    let channel_links: Vec<(usize, usize)> =
        all_links.iter().copied().filter(|&(i, j)| t.contains(&i) != t.contains(&j)).collect();
    let mut bad = Vec::new();
    for &(i, j) in &channel_links {
        for (s, p) in input.patterns.iter().enumerate() {
            if p.same_cluster(i, j) {
                bad.push(format!("{} inside a cluster for symbol {s}", fmt_link((i, j))));
            }
        }
    }
    checks.push(check("iii", "channel link ends never share a cluster", bad));

    let bad = changing
        .iter()
        .filter(|&&(i, j)| !(t.contains(&i) && t.contains(&j)))
        .map(|&l| format!("{} changes outside the transmitter", fmt_link(l)))
        .collect();
    checks.push(check("iv", "switched links lie in the transmitter", bad));

    RequirementReport { checks, channel_links }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{example1, example2};

    #[test]
    fn example_one_passes() {
        let d = example1().to_design().unwrap();
        let rep = check_requirements(&d.requirement_input());
        assert!(rep.passed(), "{}", rep.summary());
        assert_eq!(rep.channel_links, vec![(0, 1), (2, 3), (4, 5), (6, 7)]);
    }

    #[test]
    fn example_two_passes() {
        let d = example2().to_design().unwrap();
        let rep = check_requirements(&d.requirement_input());
        assert!(rep.passed(), "{}", rep.summary());
        // Channel links are the five pin links.
        assert_eq!(rep.channel_links, vec![(0, 5), (1, 5), (2, 6), (3, 6), (4, 7)]);
    }

    #[test]
    fn split_across_a_cluster_fails() {
        let d = example1().to_design().unwrap();
        let mut input = d.requirement_input();
        input.transmitter = vec![0, 3, 4];
        input.receiver = vec![1, 2, 5, 6, 7];
        let rep = check_requirements(&input);
        let failed: Vec<_> = rep.failures().iter().map(|c| c.id).collect();
        assert!(failed.contains(&"iii"), "{failed:?}");
        assert!(rep.summary().contains("l1-8"));
    }

    #[test]
    fn single_symbol_fails() {
        let d = example1().to_design().unwrap();
        let mut input = d.requirement_input();
        input.couplings.truncate(1);
        input.patterns.truncate(1);
        let rep = check_requirements(&input);
        assert_eq!(rep.failures().iter().map(|c| c.id).collect::<Vec<_>>(), vec!["i"]);
    }

    #[test]
    fn undeclared_control_link_fails() {
        let d = example1().to_design().unwrap();
        let mut input = d.requirement_input();
        input.control_links.pop();
        let rep = check_requirements(&input);
        assert_eq!(rep.failures().iter().map(|c| c.id).collect::<Vec<_>>(), vec!["ii"]);
    }

    #[test]
    fn overlapping_sides_fail() {
        let d = example1().to_design().unwrap();
        let mut input = d.requirement_input();
        input.receiver.push(0);
        let rep = check_requirements(&input);
        assert!(!rep.passed());
        assert_eq!(rep.failures()[0].id, "partition");
    }
}
