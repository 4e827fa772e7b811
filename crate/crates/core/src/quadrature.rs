//! Deterministic quadrature: adaptive Gauss–Kronrod on intervals, adaptive
//! tensor Gauss–Legendre on boxes, and fixed angular node sets.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

// Kronrod abscissae / weights for the 15-point rule with embedded 7-point Gauss.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

/// Globally adaptive Gauss–Kronrod (7/15) integration of `f` over `[a, b]`.
///
/// Subdivides the segment with the largest error estimate until the summed
/// estimate drops below `max(abs_tol, rel_tol·|I|)` or `max_segments` is hit.
/// Integrable endpoint singularities are fine: nodes never touch the ends.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64, max_segments: usize) -> Integral {
    if a == b {
        return Integral { value: 0.0, error: 0.0, converged: true };
    }
    let (v, e) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value: v, error: e });
    let mut total = v;
    let mut err = e;
    let mut count = 1;
    while err > abs_tol.max(rel_tol * total.abs()) {
        if count >= max_segments {
            return Integral { value: total, error: err, converged: false };
        }
        let seg = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            // interval exhausted in floating point
            heap.push(seg);
            return Integral { value: total, error: err, converged: false };
        }
        let (v1, e1) = gk15(&f, seg.a, mid);
        let (v2, e2) = gk15(&f, mid, seg.b);
        total += v1 + v2 - seg.value;
        err += e1 + e2 - seg.error;
        heap.push(Segment { a: seg.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: seg.b, value: v2, error: e2 });
        count += 1;
    }
    // re-sum to shed accumulated cancellation in the running totals
    let value: f64 = heap.iter().map(|s| s.value).sum();
    let error: f64 = heap.iter().map(|s| s.error).sum();
    Integral { value, error, converged: true }
}

/// Integrate over `[a, b]` after splitting at the given interior break points
/// (kinks, interior singularities).
pub fn integrate_split<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    rel_tol: f64,
    abs_tol: f64,
    max_segments: usize,
) -> Integral {
    let mut pts = vec![a];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    pts.extend(inner);
    pts.push(b);
    let mut out = Integral { value: 0.0, error: 0.0, converged: true };
    for w in pts.windows(2) {
        let part = integrate(&f, w[0], w[1], rel_tol, abs_tol, max_segments);
        out.value += part.value;
        out.error += part.error;
        out.converged &= part.converged;
    }
    out
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

#[derive(Debug, Clone)]
struct BoxRegion {
    lo: Vec<f64>,
    hi: Vec<f64>,
    value: f64,
    error: f64,
}

impl PartialEq for BoxRegion {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for BoxRegion {}
impl PartialOrd for BoxRegion {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for BoxRegion {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

struct TensorRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl TensorRule {
    fn apply<F: Fn(&[f64]) -> f64>(&self, f: &F, lo: &[f64], hi: &[f64]) -> f64 {
        let d = lo.len();
        let q = self.nodes.len();
        let total = q.pow(d as u32);
        let mut p = vec![0.0; d];
        let mut acc = 0.0;
        for flat in 0..total {
            let mut rem = flat;
            let mut w = 1.0;
            for a in 0..d {
                let k = rem % q;
                rem /= q;
                let half = 0.5 * (hi[a] - lo[a]);
                p[a] = lo[a] + half * (1.0 + self.nodes[k]);
                w *= self.weights[k] * half;
            }
            acc += w * f(&p);
        }
        acc
    }

    fn split_eval<F: Fn(&[f64]) -> f64>(&self, f: &F, lo: &[f64], hi: &[f64]) -> Vec<BoxRegion> {
        let d = lo.len();
        let mut children = Vec::with_capacity(1 << d);
        for mask in 0..(1usize << d) {
            let mut clo = lo.to_vec();
            let mut chi = hi.to_vec();
            for a in 0..d {
                let mid = 0.5 * (lo[a] + hi[a]);
                if mask >> a & 1 == 0 {
                    chi[a] = mid;
                } else {
                    clo[a] = mid;
                }
            }
            let coarse = self.apply(f, &clo, &chi);
            // error estimate: one more dyadic level
            let mut fine = 0.0;
            for sub in 0..(1usize << d) {
                let mut slo = clo.clone();
                let mut shi = chi.clone();
                for a in 0..d {
                    let mid = 0.5 * (clo[a] + chi[a]);
                    if sub >> a & 1 == 0 {
                        shi[a] = mid;
                    } else {
                        slo[a] = mid;
                    }
                }
                fine += self.apply(f, &slo, &shi);
            }
            children.push(BoxRegion { lo: clo, hi: chi, value: fine, error: (fine - coarse).abs() });
        }
        children
    }
}

/// Average of `f` over the axis-aligned box `[lo, hi]`, by recursive dyadic
/// subdivision (2^d children per split) with a tensor Gauss–Legendre rule on
/// every leaf. Refinement always targets the leaf with the largest error, so
/// point singularities at box corners are resolved geometrically.
pub fn box_average<F: Fn(&[f64]) -> f64>(f: F, lo: &[f64], hi: &[f64], rel_tol: f64, max_regions: usize) -> Integral {
    let rule = {
        let (nodes, weights) = gauss_legendre(3);
        TensorRule { nodes, weights }
    };
    let volume: f64 = lo.iter().zip(hi).map(|(l, h)| h - l).product();
    let mut heap: BinaryHeap<BoxRegion> = rule.split_eval(&f, lo, hi).into_iter().collect();
    let mut regions = heap.len();
    loop {
        let total: f64 = heap.iter().map(|r| r.value).sum();
        let err: f64 = heap.iter().map(|r| r.error).sum();
        if err <= rel_tol * total.abs() || regions >= max_regions {
            return Integral { value: total / volume, error: err / volume, converged: err <= rel_tol * total.abs() };
        }
        // refine a batch of the worst regions before re-summing
        let batch = heap.len().min(8);
        for _ in 0..batch {
            let worst = heap.pop().expect("non-empty");
            for c in rule.split_eval(&f, &worst.lo, &worst.hi) {
                heap.push(c);
            }
            regions += 1 << lo.len();
        }
    }
}

/// Unit directions on S^{d-1} used for full-dimensional shell quadrature,
/// closed under x ↦ −x. Weights are uniform and sum to |S^{d-1}|.
pub fn sphere_nodes(d: usize, count: usize) -> Vec<Vec<f64>> {
    match d {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count)
            .map(|k| {
                let th = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / count as f64;
                vec![th.cos(), th.sin()]
            })
            .collect(),
        3 => {
            // Fibonacci lattice on the upper hemisphere plus antipodes
            let half = count / 2;
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            let mut pts = Vec::with_capacity(2 * half);
            for k in 0..half {
                let z = 1.0 - (k as f64 + 0.5) / half as f64;
                let r = (1.0 - z * z).sqrt();
                let th = golden * k as f64;
                pts.push(vec![r * th.cos(), r * th.sin(), z]);
            }
            let neg: Vec<Vec<f64>> = pts.iter().map(|p| p.iter().map(|x| -x).collect()).collect();
            pts.extend(neg);
            pts
        }
        _ => {
            // generic: signed coordinate axes
            let mut pts = Vec::new();
            for a in 0..d {
                for s in [1.0, -1.0] {
                    let mut p = vec![0.0; d];
                    p[a] = s;
                    pts.push(p);
                }
            }
            pts
        }
    }
}

/// Surface area |S^{d-1}| of the unit sphere in ℝ^d.
pub fn sphere_area(d: usize) -> f64 {
    let df = d as f64;
    2.0 * std::f64::consts::PI.powf(df / 2.0) / gamma(df / 2.0)
}

/// Volume of the unit ball in ℝ^d.
pub fn ball_volume(d: usize) -> f64 {
    sphere_area(d) / d as f64
}

/// Gamma function for the half-integer and small arguments used here
/// (Lanczos approximation, g = 7).
pub fn gamma(x: f64) -> f64 {
    const G: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        std::f64::consts::PI / ((std::f64::consts::PI * x).sin() * gamma(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut a = G[0];
        let t = x + 7.5;
        for (i, g) in G.iter().enumerate().skip(1) {
            a += g / (x + i as f64);
        }
        (2.0 * std::f64::consts::PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
    }
}

/// Bessel function J0, used for the angular average of cos(2π y·ξ) in d = 2.
pub fn bessel_j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 8.0 {
        let y = x * x;
        let n = 57_568_490_574.0
            + y * (-13_362_590_354.0
                + y * (651_619_640.7 + y * (-11_214_424.18 + y * (77_392.330_17 + y * (-184.905_245_6)))));
        let d = 57_568_490_411.0
            + y * (1_029_532_985.0 + y * (9_494_680.718 + y * (59_272.648_53 + y * (267.853_271_2 + y))));
        n / d
    } else {
        let z = 8.0 / ax;
        let y = z * z;
        let xx = ax - 0.785_398_164;
        let p = 1.0
            + y * (-0.109_862_862_7e-2 + y * (0.273_451_040_7e-4 + y * (-0.207_337_063_9e-5 + y * 0.209_388_721_1e-6)));
        let q = -0.156_249_999_5e-1
            + y * (0.143_048_876_5e-3 + y * (-0.691_114_765_1e-5 + y * (0.762_109_516_1e-6 - y * 0.934_935_152e-7)));
        (std::f64::consts::FRAC_2_PI / ax).sqrt() * (xx.cos() * p - z * xx.sin() * q)
    }
}
