//! Naive reference computations shared by the integration tests. Nothing
//! here calls into the scoring code it is compared against.

#![allow(dead_code)]

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NaiveCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
    pub filtered: u64,
}

/// One full pass over the voxels per threshold.
pub fn naive_counts(gt: &[bool], pred: &[bool], unc: &[f32], taus: &[f64]) -> Vec<NaiveCounts> {
    let mut out = Vec::new();
    for &tau in taus {
        let mut c = NaiveCounts {
            tp: 0,
            tn: 0,
            fp: 0,
            fn_: 0,
            filtered: 0,
        };
        for v in 0..gt.len() {
            let kept = if tau == 100.0 {
                true
            } else {
                (unc[v] as f64) < tau
            };
            if !kept {
                c.filtered += 1;
            } else if gt[v] && pred[v] {
                c.tp += 1;
            } else if !gt[v] && !pred[v] {
                c.tn += 1;
            } else if pred[v] {
                c.fp += 1;
            } else {
                c.fn_ += 1;
            }
        }
        out.push(c);
    }
    out
}

pub struct NaiveCurve {
    pub counts: Vec<NaiveCounts>,
    pub dsc: Vec<f64>,
    pub ftp: Vec<f64>,
    pub ftn: Vec<f64>,
}

pub fn naive_curve(gt: &[bool], pred: &[bool], unc: &[f32], taus: &[f64]) -> NaiveCurve {
    let counts = naive_counts(gt, pred, unc, taus);
    let base = counts[counts.len() - 1];
    let ratio = |base: u64, now: u64| {
        if base == 0 {
            0.0
        } else {
            let r = (base as f64 - now as f64) / base as f64;
            r.clamp(0.0, 1.0)
        }
    };
    let dsc = counts
        .iter()
        .map(|c| {
            let d = 2 * c.tp + c.fp + c.fn_;
            if d == 0 {
                1.0
            } else {
                2.0 * c.tp as f64 / d as f64
            }
        })
        .collect();
    let ftp = counts.iter().map(|c| ratio(base.tp, c.tp)).collect();
    let ftn = counts.iter().map(|c| ratio(base.tn, c.tn)).collect();
    NaiveCurve {
        counts,
        dsc,
        ftp,
        ftn,
    }
}

/// Trapezoid rule divided by the abscissa span, summed left to right.
pub fn naive_auc(xs: &[f64], ys: &[f64]) -> f64 {
    let mut area = 0.0;
    for i in 1..xs.len() {
        area += (xs[i] - xs[i - 1]) * (ys[i] + ys[i - 1]) / 2.0;
    }
    area / (xs[xs.len() - 1] - xs[0])
}

pub fn naive_score(auc_dsc: f64, auc_ftp: f64, auc_ftn: f64) -> f64 {
    (auc_dsc + 1.0 - auc_ftp + 1.0 - auc_ftn) / 3.0
}

/// Exhaustive sign-swap p-value by explicit enumeration of assignments.
pub fn naive_exhaustive_p(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    let observed: f64 = b.iter().zip(a).map(|(x, y)| x - y).sum::<f64>().abs();
    let mut hits = 0u64;
    for mask in 0u64..(1 << n) {
        let mut fa = 0.0;
        let mut fb = 0.0;
        for i in 0..n {
            let (x, y) = if mask >> i & 1 == 1 {
                (b[i], a[i])
            } else {
                (a[i], b[i])
            };
            fa += x;
            fb += y;
        }
        // same orientation as the observed difference
        let sign = if b.iter().sum::<f64>() >= a.iter().sum::<f64>() {
            1.0
        } else {
            -1.0
        };
        if sign * (fb - fa) >= observed - 1e-9 {
            hits += 1;
        }
    }
    hits as f64 / (1u64 << n) as f64
}
