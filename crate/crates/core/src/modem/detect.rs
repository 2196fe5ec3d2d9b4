use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::transmit::ObservedTraces;
use crate::topology::ClusterPattern;
use crate::{Error, Result};

/// Trapezoidal integral of `||x_i - x_j||^2` over samples
/// `n * s_f ..= (n + 1) * s_f`. `i` and `j` index `traces.nodes`.
pub fn error_energy(traces: &ObservedTraces, i: usize, j: usize, n: usize, s_f: usize) -> Result<f64> {
    let start = n * s_f;
    let end = start + s_f;
    if s_f == 0 || end >= traces.len() {
        return Err(Error::Window(format!("symbol {n} needs samples {start}..={end}, trace has {}", traces.len())));
    }
    if i >= traces.nodes.len() || j >= traces.nodes.len() {
        return Err(Error::invalid("node position outside the observed set"));
    }
    let sq = |k: usize| {
        let a = traces.node(k, i);
        let b = traces.node(k, j);
        (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)
    };
    let mut acc = 0.0;
    let mut prev = sq(start);
    for k in start + 1..=end {
        let cur = sq(k);
        acc += 0.5 * (traces.times[k] - traces.times[k - 1]) * (prev + cur);
        prev = cur;
    }
    Ok(acc)
}

/// Mean over all `N_R^2` entries, diagonal included.
pub fn threshold(e: &DMatrix<f64>) -> f64 {
    if e.is_empty() {
        return 0.0;
    }
    e.sum() / e.len() as f64
}

/// `a_ij = 1` iff `E_ij <= gamma`.
pub fn sync_matrix(e: &DMatrix<f64>, gamma: f64) -> DMatrix<u8> {
    e.map(|v| u8::from(v <= gamma))
}

/// `b_ij = 1` iff receiver nodes `i` and `j` share a cluster.
pub fn reference_matrix(pattern: &ClusterPattern, receiver: &[usize]) -> Result<DMatrix<u8>> {
    if let Some(&r) = receiver.iter().find(|&&r| r >= pattern.n()) {
        return Err(Error::InvalidPattern(format!("receiver node {} not covered by the pattern", r + 1)));
    }
    let labels = pattern.labels();
    let k = receiver.len();
    Ok(DMatrix::from_fn(k, k, |a, b| u8::from(labels[receiver[a]] == labels[receiver[b]])))
}

/// Scoring of a synchronization matrix against a reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DetectionRule {
    /// `sum(A .* B_m)`.
    #[default]
    Overlap,
    /// Number of entries where `A` and `B_m` agree. Same decision as
    /// `Overlap` when every reference has the same number of ones; also
    /// separates nested patterns, where `Overlap` always favours the coarser.
    Agreement,
}

/// Index of the reference with the largest `sum(A .* B_m)`; ties go to the
/// lowest index.
pub fn detect(a: &DMatrix<u8>, refs: &[DMatrix<u8>]) -> Result<(usize, Vec<u64>)> {
    detect_with(a, refs, DetectionRule::Overlap)
}

/// [`detect`] with a selectable scoring rule.
pub fn detect_with(a: &DMatrix<u8>, refs: &[DMatrix<u8>], rule: DetectionRule) -> Result<(usize, Vec<u64>)> {
    if refs.len() < 2 {
        return Err(Error::invalid("detection needs at least two reference patterns"));
    }
    let mut scores = Vec::with_capacity(refs.len());
    for b in refs {
        if b.shape() != a.shape() {
            return Err(Error::Dimension(format!("reference {:?} vs sync matrix {:?}", b.shape(), a.shape())));
        }
        scores.push(match rule {
            DetectionRule::Overlap => a.iter().zip(b.iter()).map(|(&x, &y)| u64::from(x & y)).sum(),
            DetectionRule::Agreement => a.iter().zip(b.iter()).map(|(&x, &y)| u64::from(x == y)).sum(),
        });
    }
    let mut best = 0;
    for m in 1..scores.len() {
        if scores[m] > scores[best] {
            best = m;
        }
    }
    Ok((best, scores))
}

/// Per-symbol detector record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionFrame {
    pub n: usize,
    pub energies: DMatrix<f64>,
    pub gamma: f64,
    pub sync: DMatrix<u8>,
    pub scores: Vec<u64>,
    pub symbol: usize,
}

impl DetectionFrame {
    /// One JSON object per line.
    pub fn write_jsonl<W: Write>(frames: &[DetectionFrame], mut w: W) -> Result<()> {
        for f in frames {
            let line = serde_json::json!({
                "n": f.n,
                "gamma": f.gamma,
                "symbol": f.symbol,
                "scores": f.scores,
                "energies": rows(&f.energies),
                "sync": rows(&f.sync),
            });
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

fn rows<T: nalgebra::Scalar + Copy>(m: &DMatrix<T>) -> Vec<Vec<T>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// Runs the full detector on symbol `n` of `traces`.
pub fn detect_segment(
    traces: &ObservedTraces,
    n: usize,
    s_f: usize,
    refs: &[DMatrix<u8>],
    rule: DetectionRule,
) -> Result<DetectionFrame> {
    let k = traces.nodes.len();
    let mut e = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in i + 1..k {
            let v = error_energy(traces, i, j, n, s_f)?;
            e[(i, j)] = v;
            e[(j, i)] = v;
        }
    }
    let gamma = threshold(&e);
    let a = sync_matrix(&e, gamma);
    let (symbol, scores) = detect_with(&a, refs, rule)?;
    Ok(DetectionFrame { n, energies: e, gamma, sync: a, scores, symbol })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn traces(times: Vec<f64>, nodes: Vec<Vec<[f64; 3]>>) -> ObservedTraces {
        // nodes[k][i]: sample k, node i
        let m = nodes[0].len();
        let data = nodes.iter().flat_map(|s| s.iter().flat_map(|v| v.iter().copied())).collect();
        ObservedTraces::from_parts((0..m).collect(), times, data).unwrap()
    }

    #[test]
    fn identical_traces_have_zero_energy() {
        let t = traces(vec![0.0, 0.1, 0.2], vec![vec![[1.0, 2.0, 3.0]; 2]; 3]);
        assert_eq!(error_energy(&t, 0, 1, 0, 2).unwrap(), 0.0);
    }

    #[test]
    fn constant_error_integrates_exactly() {
        let c = 0.7f64;
        let times: Vec<f64> = (0..=10).map(|k| k as f64 * 0.05).collect();
        let t = traces(times, vec![vec![[0.0, 0.0, 0.0], [0.0, c, 0.0]]; 11]);
        let e = error_energy(&t, 0, 1, 0, 10).unwrap();
        assert!((e - c * c * 0.5).abs() < 1e-14);
        assert!(matches!(error_energy(&t, 0, 1, 1, 10), Err(Error::Window(_))));
    }

    #[test]
    fn five_sample_window_matches_summation_oracle() {
        use rand::Rng;
        let mut rng = crate::rng::rng_from_seed(8);
        let mut times = vec![0.0];
        for _ in 0..8 {
            let last = *times.last().unwrap();
            times.push(last + rng.random_range(0.01..0.1));
        }
        let samples: Vec<Vec<[f64; 3]>> = (0..9)
            .map(|_| {
                (0..2)
                    .map(|_| [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)])
                    .collect()
            })
            .collect();
        let t = traces(times.clone(), samples.clone());
        // Symbol 1 covers samples 4..=8.
        let f = |k: usize| -> f64 { (0..3).map(|c| (samples[k][0][c] - samples[k][1][c]).powi(2)).sum() };
        let mut oracle = 0.0;
        for k in 4..8 {
            oracle += (times[k + 1] - times[k]) * (f(k) + f(k + 1)) / 2.0;
        }
        assert!((error_energy(&t, 0, 1, 1, 4).unwrap() - oracle).abs() < 1e-12);
    }

    #[test]
    fn threshold_with_equal_off_diagonals() {
        let e = DMatrix::from_fn(4, 4, |i, j| if i == j { 0.0 } else { 2.0 });
        assert_eq!(threshold(&e), 0.75 * 2.0);
        assert_eq!(threshold(&DMatrix::zeros(4, 4)), 0.0);
    }

    #[test]
    fn zero_energies_sync_everything() {
        let a = sync_matrix(&DMatrix::zeros(4, 4), 0.0);
        assert!(a.iter().all(|&v| v == 1));
    }

    #[test]
    fn reference_matrices() {
        let p1 = ClusterPattern::from_one_based(&[vec![1, 8], vec![2, 7], vec![3, 6], vec![4, 5]], 8).unwrap();
        let rx = [1, 2, 5, 6];
        let b = reference_matrix(&p1, &rx).unwrap();
        let want = DMatrix::from_row_slice(4, 4, &[1, 0, 0, 1, 0, 1, 1, 0, 0, 1, 1, 0, 1, 0, 0, 1]);
        assert_eq!(b, want);
        let single = ClusterPattern::singletons(8);
        assert_eq!(reference_matrix(&single, &rx).unwrap(), DMatrix::identity(4, 4));
        let one = ClusterPattern::new(vec![(0..8).collect()], 8).unwrap();
        assert!(reference_matrix(&one, &rx).unwrap().iter().all(|&v| v == 1));
        assert!(reference_matrix(&p1, &[9]).is_err());
    }

    fn example_refs() -> Vec<DMatrix<u8>> {
        let p1 = ClusterPattern::from_one_based(&[vec![1, 8], vec![2, 7], vec![3, 6], vec![4, 5]], 8).unwrap();
        let p2 = ClusterPattern::from_one_based(&[vec![1, 4], vec![2, 3], vec![5, 8], vec![6, 7]], 8).unwrap();
        let rx = [1, 2, 5, 6];
        vec![reference_matrix(&p1, &rx).unwrap(), reference_matrix(&p2, &rx).unwrap()]
    }

    #[test]
    fn exact_reference_is_detected() {
        let refs = example_refs();
        for (m, b) in refs.iter().enumerate() {
            let (s, scores) = detect(b, &refs).unwrap();
            assert_eq!(s, m);
            assert_eq!(scores[m], b.iter().map(|&v| u64::from(v)).sum::<u64>());
        }
    }

    #[test]
    fn all_ones_ties_to_lowest_index() {
        let refs = example_refs();
        let (s, scores) = detect(&DMatrix::from_element(4, 4, 1u8), &refs).unwrap();
        assert_eq!(scores[0], scores[1]);
        assert_eq!(s, 0);
    }

    #[test]
    fn detect_argument_checks() {
        let refs = example_refs();
        assert!(detect(&refs[0], &refs[..1]).is_err());
        assert!(detect(&DMatrix::from_element(3, 3, 1u8), &refs).is_err());
    }

    fn brute_force(a: &DMatrix<u8>, refs: &[DMatrix<u8>]) -> usize {
        let mut best = (0, 0u64);
        for (m, b) in refs.iter().enumerate() {
            let mut s = 0u64;
            for i in 0..a.nrows() {
                for j in 0..a.ncols() {
                    s += u64::from(a[(i, j)]) * u64::from(b[(i, j)]);
                }
            }
            if m == 0 || s > best.1 {
                best = (m, s);
            }
        }
        best.0
    }

    fn sym_energies(v: &[f64]) -> DMatrix<f64> {
        let mut e = DMatrix::zeros(4, 4);
        let mut k = 0;
        for i in 0..4 {
            for j in i + 1..4 {
                e[(i, j)] = v[k];
                e[(j, i)] = v[k];
                k += 1;
            }
        }
        e
    }

    #[test]
    fn nested_patterns_need_agreement() {
        let coarse = ClusterPattern::from_one_based(&[vec![1, 2, 3, 4], vec![5]], 5).unwrap();
        let fine = ClusterPattern::from_one_based(&[vec![1, 2], vec![3, 4], vec![5]], 5).unwrap();
        let rx: Vec<usize> = (0..5).collect();
        let refs = vec![reference_matrix(&coarse, &rx).unwrap(), reference_matrix(&fine, &rx).unwrap()];
        // The fine reference can never beat the coarse one on overlap.
        assert_eq!(detect(&refs[1], &refs).unwrap().0, 0);
        assert_eq!(detect_with(&refs[1], &refs, DetectionRule::Agreement).unwrap().0, 1);
        assert_eq!(detect_with(&refs[0], &refs, DetectionRule::Agreement).unwrap().0, 0);
    }

    proptest! {
        #[test]
        fn agreement_equals_overlap_for_equal_mass(v in proptest::collection::vec(0.0..10.0f64, 6)) {
            let refs = example_refs();
            let e = sym_energies(&v);
            let a = sync_matrix(&e, threshold(&e));
            prop_assert_eq!(
                detect(&a, &refs).unwrap().0,
                detect_with(&a, &refs, DetectionRule::Agreement).unwrap().0
            );
        }

        #[test]
        fn detection_matches_brute_force(v in proptest::collection::vec(0.0..10.0f64, 6)) {
            let refs = example_refs();
            let e = sym_energies(&v);
            let a = sync_matrix(&e, threshold(&e));
            prop_assert_eq!(detect(&a, &refs).unwrap().0, brute_force(&a, &refs));
            prop_assert_eq!(a.transpose(), a.clone());
            prop_assert!((0..4).all(|i| a[(i, i)] == 1));
        }

        #[test]
        fn energy_scaling_preserves_decision(v in proptest::collection::vec(0.0..10.0f64, 6), c in 1e-3..1e3f64) {
            let refs = example_refs();
            let e = sym_energies(&v);
            let a = sync_matrix(&e, threshold(&e));
            let es = &e * c;
            let b = sync_matrix(&es, threshold(&es));
            prop_assert_eq!(detect(&a, &refs).unwrap().0, detect(&b, &refs).unwrap().0);
        }

        #[test]
        fn relabeling_is_equivariant(v in proptest::collection::vec(0.0..10.0f64, 6), perm in Just([2usize, 0, 3, 1])) {
            let refs = example_refs();
            let e = sym_energies(&v);
            let a = sync_matrix(&e, threshold(&e));
            let p = |m: &DMatrix<u8>| DMatrix::from_fn(4, 4, |i, j| m[(perm[i], perm[j])]);
            let prefs: Vec<_> = refs.iter().map(p).collect();
            prop_assert_eq!(detect(&a, &refs).unwrap().0, detect(&p(&a), &prefs).unwrap().0);
        }

        #[test]
        fn scaling_threshold(v in proptest::collection::vec(0.0..10.0f64, 6), c in 0.0..100.0f64) {
            let e = sym_energies(&v);
            prop_assert!((threshold(&(&e * c)) - c * threshold(&e)).abs() < 1e-9);
        }
    }
}
