//! Segmentation quality: accuracy after optimal cluster matching, and
//! one-vs-rest Dice (SDS) and Matthews correlation (MCC).

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest cluster count accepted by [`match_clusters`].
pub const MAX_MATCH_CLUSTERS: usize = 10;

/// Per-pixel labels in `0..c`, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    width: usize,
    height: usize,
    labels: Vec<usize>,
}

impl LabelMap {
    pub fn new(width: usize, height: usize, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != width * height {
            return Err(Error::Shape(format!(
                "{width}x{height} label map needs {} labels, got {}",
                width * height,
                labels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            labels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn check_range(&self, c: usize) -> Result<()> {
        match self.labels.iter().position(|&l| l >= c) {
            Some(pixel) => Err(Error::LabelRange {
                pixel,
                label: self.labels[pixel],
                c,
            }),
            None => Ok(()),
        }
    }

    /// Applies `mapping[old] = new` to every label.
    pub fn relabel(&self, mapping: &[usize]) -> LabelMap {
        LabelMap {
            labels: self.labels.iter().map(|&l| mapping[l]).collect(),
            ..self.clone()
        }
    }
}

fn check_pair(pred: &LabelMap, truth: &LabelMap) -> Result<()> {
    if pred.width != truth.width || pred.height != truth.height {
        return Err(Error::Shape(format!(
            "prediction is {}x{}, ground truth is {}x{}",
            pred.width, pred.height, truth.width, truth.height
        )));
    }
    Ok(())
}

/// `overlap[p][t] = |{j : pred_j = p, truth_j = t}|`.
fn overlaps(pred: &LabelMap, truth: &LabelMap, c: usize) -> Vec<Vec<i64>> {
    let mut table = vec![vec![0i64; c]; c];
    for (&p, &t) in pred.labels.iter().zip(&truth.labels) {
        table[p][t] += 1;
    }
    table
}

/// Minimum-cost perfect assignment on a square matrix (Hungarian method
/// with potentials). Returns `assignment[row] = column`.
fn min_cost_assignment(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    // 1-based internally; column 0 is a sentinel
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        owner[0] = row;
        let mut col0 = 0;
        let mut minv = vec![i64::MAX; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[col0] = true;
            let r = owner[col0];
            let mut delta = i64::MAX;
            let mut next = 0;
            for col in 1..=n {
                if used[col] {
                    continue;
                }
                let reduced = cost[r - 1][col - 1] - u[r] - v[col];
                if reduced < minv[col] {
                    minv[col] = reduced;
                    way[col] = col0;
                }
                if minv[col] < delta {
                    delta = minv[col];
                    next = col;
                }
            }
            for col in 0..=n {
                if used[col] {
                    u[owner[col]] += delta;
                    v[col] -= delta;
                } else {
                    minv[col] -= delta;
                }
            }
            col0 = next;
            if owner[col0] == 0 {
                break;
            }
        }
        loop {
            let prev = way[col0];
            owner[col0] = owner[prev];
            col0 = prev;
            if col0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for col in 1..=n {
        if owner[col] > 0 {
            assignment[owner[col] - 1] = col - 1;
        }
    }
    assignment
}

/// Mapping `pred label -> truth label` maximizing the total overlap.
pub fn match_clusters(pred: &LabelMap, truth: &LabelMap, c: usize) -> Result<Vec<usize>> {
    if c > MAX_MATCH_CLUSTERS {
        return Err(Error::TooManyClusters(c));
    }
    check_pair(pred, truth)?;
    pred.check_range(c)?;
    truth.check_range(c)?;
    // Rows go to the solver in first-occurrence order, so tied optima are
    // broken by the partition itself rather than by how clusters are named.
    let order = first_occurrence_order(pred, c);
    let table = overlaps(pred, truth, c);
    let cost: Vec<Vec<i64>> = order
        .iter()
        .map(|&p| table[p].iter().map(|&o| -o).collect())
        .collect();
    let assigned = min_cost_assignment(&cost);
    let mut mapping = vec![0; c];
    for (row, &p) in order.iter().enumerate() {
        mapping[p] = assigned[row];
    }
    Ok(mapping)
}

fn first_occurrence_order(map: &LabelMap, c: usize) -> Vec<usize> {
    let mut seen = vec![false; c];
    let mut order = Vec::with_capacity(c);
    for &l in &map.labels {
        if !seen[l] {
            seen[l] = true;
            order.push(l);
            if order.len() == c {
                break;
            }
        }
    }
    order.extend((0..c).filter(|&l| !seen[l]));
    order
}

/// Fraction of pixels whose labels agree. Labels are compared as given;
/// align them with [`match_clusters`] first.
pub fn segmentation_accuracy(pred: &LabelMap, truth: &LabelMap) -> Result<f64> {
    check_pair(pred, truth)?;
    let agree = pred
        .labels
        .iter()
        .zip(&truth.labels)
        .filter(|(p, t)| p == t)
        .count();
    Ok(agree as f64 / pred.len() as f64)
}

/// Accuracy after optimal matching of predicted to true labels.
pub fn matched_accuracy(pred: &LabelMap, truth: &LabelMap, c: usize) -> Result<f64> {
    let mapping = match_clusters(pred, truth, c)?;
    segmentation_accuracy(&pred.relabel(&mapping), truth)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn new(tp: u64, fp: u64, tn: u64, fn_: u64) -> Self {
        Self { tp, fp, tn, fn_ }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// One-vs-rest counts for `positive`.
pub fn confusion(pred: &LabelMap, truth: &LabelMap, positive: usize) -> Result<ConfusionCounts> {
    check_pair(pred, truth)?;
    let mut counts = ConfusionCounts::default();
    for (&p, &t) in pred.labels.iter().zip(&truth.labels) {
        match (p == positive, t == positive) {
            (true, true) => counts.tp += 1,
            (true, false) => counts.fp += 1,
            (false, false) => counts.tn += 1,
            (false, true) => counts.fn_ += 1,
        }
    }
    Ok(counts)
}

/// Matthews correlation; 0 when any marginal is empty.
pub fn mcc(counts: &ConfusionCounts) -> f64 {
    let tp = counts.tp as f64;
    let fp = counts.fp as f64;
    let tn = counts.tn as f64;
    let fn_ = counts.fn_ as f64;
    let den = (tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_);
    if den == 0.0 {
        return 0.0;
    }
    (tp * tn - fp * fn_) / den.sqrt()
}

/// Sorensen-Dice similarity; 0 when there are no positives at all.
pub fn sds(counts: &ConfusionCounts) -> f64 {
    let den = 2 * counts.tp + counts.fp + counts.fn_;
    if den == 0 {
        return 0.0;
    }
    (2 * counts.tp) as f64 / den as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassMetrics {
    pub class: usize,
    #[serde(flatten)]
    pub counts: ConfusionCounts,
    pub sds: f64,
    pub mcc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub sa: f64,
    pub sds_macro: f64,
    pub mcc_macro: f64,
    pub per_class: Vec<ClassMetrics>,
    /// `mapping[pred label] = truth label`
    pub mapping: Vec<usize>,
}

/// Matches clusters, then computes SA and macro-averaged one-vs-rest SDS
/// and MCC. Classes absent from both maps are left out of the averages.
pub fn report(pred: &LabelMap, truth: &LabelMap, c: usize) -> Result<MetricsReport> {
    let mapping = match_clusters(pred, truth, c)?;
    let aligned = pred.relabel(&mapping);
    let sa = segmentation_accuracy(&aligned, truth)?;
    let mut per_class = Vec::with_capacity(c);
    for class in 0..c {
        let counts = confusion(&aligned, truth, class)?;
        if counts.tp + counts.fp + counts.fn_ == 0 {
            continue;
        }
        per_class.push(ClassMetrics {
            class,
            counts,
            sds: sds(&counts),
            mcc: mcc(&counts),
        });
    }
    let n = per_class.len() as f64;
    let sds_macro = per_class.iter().map(|m| m.sds).sum::<f64>() / n;
    let mcc_macro = per_class.iter().map(|m| m.mcc).sum::<f64>() / n;
    Ok(MetricsReport {
        sa,
        sds_macro,
        mcc_macro,
        per_class,
        mapping,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn map(labels: &[usize]) -> LabelMap {
        LabelMap::new(labels.len(), 1, labels.to_vec()).unwrap()
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn matching_examples() {
        let truth = map(&[0, 0, 1, 1, 2]);
        assert_eq!(match_clusters(&truth, &truth, 3).unwrap(), vec![0, 1, 2]);
        let swapped = map(&[1, 1, 0, 0, 2]);
        assert_eq!(match_clusters(&swapped, &truth, 3).unwrap(), vec![1, 0, 2]);

        let pred = LabelMap::new(2, 2, vec![0, 0, 1, 1]).unwrap();
        let truth = LabelMap::new(2, 2, vec![1, 1, 0, 0]).unwrap();
        let mapping = match_clusters(&pred, &truth, 2).unwrap();
        assert_eq!(mapping, vec![1, 0]);
        assert_eq!(matched_accuracy(&pred, &truth, 2).unwrap(), 1.0);
    }

    #[test]
    fn matching_guards() {
        let m = map(&[0, 1]);
        assert!(matches!(
            match_clusters(&m, &m, 11),
            Err(Error::TooManyClusters(11))
        ));
        assert!(match_clusters(&map(&[0, 3]), &m, 2).is_err());
        assert!(match_clusters(&map(&[0, 1, 1]), &m, 2).is_err());
    }

    #[test]
    fn accuracy_counts() {
        assert_eq!(
            segmentation_accuracy(&map(&[0, 1, 2]), &map(&[0, 1, 2])).unwrap(),
            1.0
        );
        assert_eq!(
            segmentation_accuracy(&map(&[0, 0, 1, 1]), &map(&[0, 0, 1, 0])).unwrap(),
            0.75
        );
    }

    #[test]
    fn confusion_examples() {
        // class 1 positive: truth (+,+,-,-), pred (+,-,+,-)
        let c = confusion(&map(&[1, 0, 1, 0]), &map(&[1, 1, 0, 0]), 1).unwrap();
        assert_eq!(c, ConfusionCounts::new(1, 1, 1, 1));
        let c = confusion(&map(&[0, 0, 0]), &map(&[1, 1, 1]), 1).unwrap();
        assert_eq!(c, ConfusionCounts::new(0, 0, 0, 3));
        let c = confusion(&map(&[2, 0, 2]), &map(&[2, 0, 2]), 2).unwrap();
        assert_eq!((c.fp, c.fn_), (0, 0));
    }

    #[test]
    fn mcc_examples() {
        assert_eq!(mcc(&ConfusionCounts::new(5, 0, 5, 0)), 1.0);
        assert_eq!(mcc(&ConfusionCounts::new(0, 5, 0, 5)), -1.0);
        assert_eq!(mcc(&ConfusionCounts::new(2, 1, 1, 0)), 2.0 / 12f64.sqrt());
        assert_eq!(mcc(&ConfusionCounts::new(0, 0, 0, 3)), 0.0);
    }

    #[test]
    fn sds_examples() {
        assert_eq!(sds(&ConfusionCounts::new(4, 0, 7, 0)), 1.0);
        assert_eq!(sds(&ConfusionCounts::new(2, 1, 0, 1)), 4.0 / 6.0);
        assert_eq!(sds(&ConfusionCounts::new(0, 0, 9, 0)), 0.0);
    }

    #[test]
    fn report_identical_maps() {
        let m = map(&[0, 1, 2, 3, 3, 2, 1, 0]);
        let r = report(&m, &m, 4).unwrap();
        assert_eq!((r.sa, r.sds_macro, r.mcc_macro), (1.0, 1.0, 1.0));
        // class 4 never appears and is skipped
        let r = report(&m, &m, 5).unwrap();
        assert_eq!((r.sa, r.sds_macro, r.mcc_macro), (1.0, 1.0, 1.0));
    }

    #[test]
    fn report_three_by_three_fixture() {
        // truth: top row and left column are class 1
        let truth = LabelMap::new(3, 3, vec![1, 1, 1, 1, 0, 0, 1, 0, 0]).unwrap();
        let pred = LabelMap::new(3, 3, vec![1, 1, 0, 1, 0, 0, 1, 1, 0]).unwrap();
        let r = report(&pred, &truth, 2).unwrap();
        // matched overlap: 7 of 9
        assert!((r.sa - 7.0 / 9.0).abs() < 1e-15);
        // class 1: tp 4, fp 1, tn 3, fn 1; class 0: tp 3, fp 1, tn 4, fn 1
        let c1 = &r.per_class[1];
        assert_eq!(c1.counts, ConfusionCounts::new(4, 1, 3, 1));
        assert!((c1.sds - 8.0 / 10.0).abs() < 1e-15);
        let c0 = &r.per_class[0];
        assert_eq!(c0.counts, ConfusionCounts::new(3, 1, 4, 1));
        assert!((c0.sds - 6.0 / 8.0).abs() < 1e-15);
        let mcc_both = (12.0 - 1.0) / (5.0f64 * 5.0 * 4.0 * 4.0).sqrt();
        assert!((c0.mcc - mcc_both).abs() < 1e-15 && (c1.mcc - mcc_both).abs() < 1e-15);
        assert!((r.sds_macro - 0.775).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn hungarian_matches_brute_force(
            c in 1usize..6,
            seed_labels in proptest::collection::vec((0usize..6, 0usize..6), 1..60),
        ) {
            let pred: Vec<usize> = seed_labels.iter().map(|(p, _)| p % c).collect();
            let truth: Vec<usize> = seed_labels.iter().map(|(_, t)| t % c).collect();
            let (pred, truth) = (map(&pred), map(&truth));
            let table = overlaps(&pred, &truth, c);
            let best = permutations(c)
                .iter()
                .map(|perm| (0..c).map(|p| table[p][perm[p]]).sum::<i64>())
                .max()
                .unwrap();
            let mapping = match_clusters(&pred, &truth, c).unwrap();
            let got: i64 = (0..c).map(|p| table[p][mapping[p]]).sum();
            prop_assert_eq!(got, best);
            let mut sorted = mapping.clone();
            sorted.sort();
            prop_assert_eq!(sorted, (0..c).collect::<Vec<_>>());
        }

        #[test]
        fn accuracy_is_symmetric_after_matching(
            labels in proptest::collection::vec((0usize..4, 0usize..4), 1..80),
        ) {
            let pred = map(&labels.iter().map(|l| l.0).collect::<Vec<_>>());
            let truth = map(&labels.iter().map(|l| l.1).collect::<Vec<_>>());
            let a = matched_accuracy(&pred, &truth, 4).unwrap();
            let b = matched_accuracy(&truth, &pred, 4).unwrap();
            prop_assert!((a - b).abs() < 1e-15);
            prop_assert!((0.0..=1.0).contains(&a));
        }
    }
}
