//! Quadrature primitives: Gauss–Legendre rules, adaptive Gauss–Kronrod,
//! Wynn's epsilon algorithm and Legendre-basis Filon panels.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use crate::special::spherical_bessel_j;

/// Result of a quadrature with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub err_est: f64,
    pub converged: bool,
}

/// Gauss–Legendre rule on [-1, 1] with Legendre polynomial values at its nodes.
#[derive(Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `legendre[k][j]` = P_k(nodes[j]) for k < n.
    pub legendre: Vec<Vec<f64>>,
}

impl GaussLegendre {
    fn compute(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_and_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_and_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        nodes.reverse();
        weights.reverse();
        let mut legendre = vec![vec![0.0; n]; n];
        for (j, &x) in nodes.iter().enumerate() {
            let (mut p0, mut p1) = (1.0, x);
            legendre[0][j] = 1.0;
            if n > 1 {
                legendre[1][j] = x;
            }
            for k in 1..n.saturating_sub(1) {
                let p2 = ((2 * k + 1) as f64 * x * p1 - k as f64 * p0) / (k + 1) as f64;
                legendre[k + 1][j] = p2;
                p0 = p1;
                p1 = p2;
            }
        }
        GaussLegendre { nodes, weights, legendre }
    }

    /// Shared cached rule with `n` points.
    pub fn get(n: usize) -> Arc<GaussLegendre> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("gauss-legendre cache poisoned");
        guard.entry(n).or_insert_with(|| Arc::new(GaussLegendre::compute(n))).clone()
    }

    /// Nodes mapped onto [a, b].
    pub fn mapped_nodes(&self, a: f64, b: f64) -> impl Iterator<Item = f64> + '_ {
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        self.nodes.iter().map(move |&x| c + h * x)
    }

    /// ∫_a^b f using this rule.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(c + h * x);
        }
        s * h
    }

    /// Legendre coefficients of the interpolant through `values` at the nodes.
    pub fn legendre_coefficients(&self, values: &[f64]) -> Vec<f64> {
        let n = self.nodes.len();
        (0..n)
            .map(|k| {
                let s: f64 = (0..n).map(|j| self.weights[j] * values[j] * self.legendre[k][j]).sum();
                s * (2 * k + 1) as f64 / 2.0
            })
            .collect()
    }
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let p2 = ((2 * k + 1) as f64 * x * p1 - k as f64 * p0) / (k + 1) as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// ∫_{-1}^{1} p(x) e^{iκx} dx for p given by Legendre coefficients;
/// uses ∫ P_k e^{iκx} = 2 i^k j_k(κ). Returns (real, imaginary).
pub fn filon_legendre(coeffs: &[f64], kappa: f64) -> (f64, f64) {
    let j = spherical_bessel_j(coeffs.len(), kappa.abs());
    let (mut re, mut im) = (0.0, 0.0);
    for (k, (&c, &jk)) in coeffs.iter().zip(&j).enumerate() {
        let v = 2.0 * c * jk;
        match k % 4 {
            0 => re += v,
            1 => im += v,
            2 => re -= v,
            _ => im -= v,
        }
    }
    if kappa < 0.0 {
        im = -im;
    }
    (re, im)
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_323_474_430,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// One G10–K21 panel: (value, error estimate).
pub fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = WGK[10] * fc;
    let mut rg = 0.0;
    let mut resabs = rk.abs();
    let mut fv = [(0.0, 0.0); 10];
    for i in 0..10 {
        let dx = h * XGK[i];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        fv[i] = (f1, f2);
        rk += WGK[i] * (f1 + f2);
        resabs += WGK[i] * (f1.abs() + f2.abs());
        if i % 2 == 1 {
            rg += WG[i / 2] * (f1 + f2);
        }
    }
    let mean = rk * 0.5;
    let mut resasc = WGK[10] * (fc - mean).abs();
    for i in 0..10 {
        resasc += WGK[i] * ((fv[i].0 - mean).abs() + (fv[i].1 - mean).abs());
    }
    let value = rk * h;
    let resabs = resabs * h.abs();
    let resasc = resasc * h.abs();
    let mut err = ((rk - rg) * h).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (value, err)
}

#[derive(Debug)]
struct Interval {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Interval {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Interval {}
impl PartialOrd for Interval {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Interval {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// Globally adaptive Gauss–Kronrod quadrature on a finite interval.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> QuadResult {
    if a == b {
        return QuadResult { value: 0.0, err_est: 0.0, converged: true };
    }
    let (v, e) = gk21(&mut f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Interval { a, b, value: v, err: e });
    let mut total = v;
    let mut err = e;
    let mut count = 1;
    while err > abs_tol.max(rel_tol * total.abs()) && count < max_intervals {
        let Some(worst) = heap.pop() else { break };
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a.min(worst.b) || m >= worst.a.max(worst.b) {
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk21(&mut f, worst.a, m);
        let (v2, e2) = gk21(&mut f, m, worst.b);
        total += v1 + v2 - worst.value;
        err += e1 + e2 - worst.err;
        heap.push(Interval { a: worst.a, b: m, value: v1, err: e1 });
        heap.push(Interval { a: m, b: worst.b, value: v2, err: e2 });
        count += 1;
    }
    // re-sum to shed accumulated update rounding
    let mut ivs: Vec<Interval> = heap.into_vec();
    ivs.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value: f64 = ivs.iter().map(|i| i.value).sum();
    let err_est: f64 = ivs.iter().map(|i| i.err).sum();
    QuadResult { value, err_est, converged: err_est <= abs_tol.max(rel_tol * value.abs()) }
}

/// Wynn's epsilon algorithm over a sliding window of partial sums.
#[derive(Debug, Default, Clone)]
pub struct WynnEpsilon {
    sums: Vec<f64>,
    history: Vec<f64>,
}

impl WynnEpsilon {
    const WINDOW: usize = 40;

    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a partial sum and returns (accelerated estimate, error estimate).
    pub fn push(&mut self, s: f64) -> (f64, f64) {
        self.sums.push(s);
        if self.sums.len() > Self::WINDOW {
            self.sums.remove(0);
        }
        let est = epsilon_limit(&self.sums);
        self.history.push(est);
        let n = self.history.len();
        let err = if n >= 3 {
            let d1 = (self.history[n - 1] - self.history[n - 2]).abs();
            let d2 = (self.history[n - 2] - self.history[n - 3]).abs();
            d1.max(d2)
        } else if n == 2 {
            (self.history[1] - self.history[0]).abs()
        } else {
            f64::INFINITY
        };
        (est, err)
    }
}

/// Highest even-column entry of the epsilon table built from `s`.
pub fn epsilon_limit(s: &[f64]) -> f64 {
    let n = s.len();
    if n < 3 {
        return *s.last().unwrap_or(&0.0);
    }
    // prev = ε_{k-1}, cur = ε_k columns
    let mut prev: Vec<f64> = vec![0.0; n + 1];
    let mut cur: Vec<f64> = s.to_vec();
    let mut best = s[n - 1];
    let mut k = 0;
    while cur.len() >= 2 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let d = cur[i + 1] - cur[i];
            if d == 0.0 || !d.is_finite() {
                return best;
            }
            next.push(prev[i + 1] + 1.0 / d);
        }
        prev = cur;
        cur = next;
        k += 1;
        if k % 2 == 0 {
            let v = *cur.last().expect("nonempty");
            if !v.is_finite() {
                return best;
            }
            best = v;
        }
    }
    best
}
