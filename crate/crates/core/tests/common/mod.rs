//! Independent oracles shared by the integration suites.
//!
//! Nothing here calls into the code path it is used to check: exact rational
//! arithmetic, brute-force sums and a hand-written signal chain.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use shequid_core::constants::{G, HBAR, M_HE4};
use shequid_core::ExperimentConfig;

/// Exact rational value of a decimal literal such as `"3e-2"` or `"2.16998"`.
pub fn dec(s: &str) -> BigRational {
    let (mant, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().unwrap()),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mant),
    };
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    let digits: BigInt = format!("{int}{frac}").parse().unwrap();
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut r = BigRational::from_integer(digits);
    if scale >= 0 {
        r *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    if neg {
        -r
    } else {
        r
    }
}

/// Exact rational value of an f64.
pub fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap()
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap()
}

/// `x^{2/3}` to 2⁻ᴷ absolute accuracy by integer bisection on `Y³ q² ≤ 2^{3K} p²`.
pub fn two_thirds_power(x: &BigRational) -> BigRational {
    assert!(!x.is_negative());
    const K: usize = 160;
    let p = x.numer().clone();
    let q = x.denom().clone();
    let rhs = (BigInt::one() << (3 * K)) * &p * &p;
    let q2 = &q * &q;
    let mut lo = BigInt::zero();
    let mut hi = BigInt::one() << (K + 64);
    while &hi - &lo > BigInt::one() {
        let mid: BigInt = (&lo + &hi) >> 1;
        if &mid * &mid * &mid * &q2 <= rhs {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    BigRational::new(lo, BigInt::one() << K)
}

/// Superfluid density from exact inputs.
pub fn rho_s_exact(
    t_lambda: &BigRational,
    t: &BigRational,
    rho_lambda: &BigRational,
) -> BigRational {
    let x = (t_lambda - t) / t_lambda;
    dec("2.4") * rho_lambda * two_thirds_power(&x)
}

/// `A (Lσρ_s)² (G/ħ) (1/2f_J) (1/d)` in exact arithmetic.
#[allow(clippy::too_many_arguments)]
pub fn phase_exact(
    a: &BigRational,
    l: &BigRational,
    sigma: &BigRational,
    rho: &BigRational,
    g: &BigRational,
    hbar: &BigRational,
    f_j: &BigRational,
    d: &BigRational,
) -> BigRational {
    let m = l * sigma * rho;
    let two = BigRational::from_integer(BigInt::from(2));
    a * &m * &m * g / hbar / (two * f_j) / d
}

/// Mutual-energy form factor by an `n × n` midpoint sum.
pub fn form_factor_brute(l: f64, d: f64, n: usize) -> f64 {
    let h = l / n as f64;
    let mut total = 0.0;
    for i in 0..n {
        let x = (i as f64 + 0.5) * h;
        let mut row = 0.0;
        for j in 0..n {
            let y = (j as f64 + 0.5) * h;
            row += 1.0 / ((x - y).powi(2) + d * d).sqrt();
        }
        total += row;
    }
    d / (l * l) * total * h * h
}

/// Dipole–dipole energy of two dipoles `p1`, `p2` separated by `r`, in units
/// of `1/(4πε₀)`.
pub fn dipole_energy(p1: [f64; 3], p2: [f64; 3], r: [f64; 3]) -> f64 {
    let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let r2 = dot(r, r);
    let rn = r2.sqrt();
    (dot(p1, p2) - 3.0 * dot(p1, r) * dot(p2, r) / r2) / (r2 * rn)
}

/// Force along the separation axis (positive = apart) between two parallel
/// polarized lines, summed over `n × n` segment pairs. Each pair force is
/// the central finite difference of the dipole energy.
pub fn dipole_lines_brute(p_line: f64, l: f64, d: f64, dir: [f64; 3], n: usize) -> f64 {
    let h = l / n as f64;
    let p = [
        dir[0] * p_line * h,
        dir[1] * p_line * h,
        dir[2] * p_line * h,
    ];
    let eps = d * 1e-5;
    let mut total = 0.0;
    for i in 0..n {
        let x1 = (i as f64 + 0.5) * h;
        let mut row = 0.0;
        for j in 0..n {
            let dx = (j as f64 + 0.5) * h - x1;
            let up = dipole_energy(p, p, [dx, 0.0, d + eps]);
            let down = dipole_energy(p, p, [dx, 0.0, d - eps]);
            row -= (up - down) / (2.0 * eps);
        }
        total += row;
    }
    total / (4.0 * std::f64::consts::PI * shequid_core::constants::EPSILON_0)
}

/// Configuration with the cross section scaled so the static phase is
/// about `phi` rad.
pub fn small_phi_config(phi: f64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    let full = shequid_core::coupling::evaluate(&cfg).unwrap().phi_grav;
    cfg.geometry.cross_section *= (phi / full).sqrt();
    cfg
}

/// Noise-free detector signal at time `t`, written out directly:
/// `P = ½(1 + cos(φ/2)·cos(θ + φ/2))` with `φ` from the inverse-distance law.
pub fn signal_oracle(cfg: &ExperimentConfig, t: f64) -> f64 {
    let sf = &cfg.superfluid;
    let g = &cfg.geometry;
    let dr = &cfg.drive;
    let x = (sf.t_lambda - sf.temperature) / sf.t_lambda;
    let rho = 2.4 * sf.rho_lambda * x.powf(2.0 / 3.0);
    let m = g.length * g.cross_section * rho;
    let d = g.separation
        - dr.modulation_amplitude
            * (2.0 * std::f64::consts::PI * dr.modulation_frequency * t).sin();
    let a = match cfg.coupling.form_factor {
        shequid_core::coupling::FormFactorModel::Fixed(a) => a,
        _ => panic!("oracle handles fixed form factors only"),
    };
    let phi = a * m * m * G / HBAR / (2.0 * dr.josephson_frequency) / d;
    let area = g.loop_area.unwrap_or(g.length * g.length);
    let theta = 2.0 * M_HE4 * cfg.rotation.omega_perp() * area / HBAR;
    0.5 * (1.0 + (phi / 2.0).cos() * (theta + phi / 2.0).cos())
}

/// Fourier amplitude of harmonic `n` of a `period`-periodic function by a
/// plain trapezoid sum over `m` points of one period.
pub fn harmonic_amplitude_oracle<F: Fn(f64) -> f64>(f: F, period: f64, n: usize, m: usize) -> f64 {
    let (mut c, mut s) = (0.0, 0.0);
    for k in 0..m {
        let t = period * k as f64 / m as f64;
        let w = 2.0 * std::f64::consts::PI * n as f64 * k as f64 / m as f64;
        let v = f(t);
        c += v * w.cos();
        s += v * w.sin();
    }
    2.0 / m as f64 * (c * c + s * s).sqrt()
}

/// One-sample Kolmogorov–Smirnov test against U(0,1); returns the
/// asymptotic p-value.
pub fn ks_uniform_pvalue(samples: &[f64]) -> f64 {
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in v.iter().enumerate() {
        let x = x.clamp(0.0, 1.0);
        d = d.max((i as f64 + 1.0) / n - x).max(x - i as f64 / n);
    }
    let lambda = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    let mut p = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        p += 2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * lambda * lambda).exp();
    }
    p.clamp(0.0, 1.0)
}

/// Half-radian coupling, no Sagnac bias and a 10% stroke so the modulation
/// sits on a steep part of the fringe.
pub fn steep_config() -> ExperimentConfig {
    let mut cfg = small_phi_config(0.5);
    cfg.rotation.omega_perp = Some(0.0);
    cfg.drive.modulation_amplitude = 1e-3;
    cfg
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations.
#[allow(clippy::needless_range_loop)]
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}

/// Negativity of a pure two-qubit state given as amplitudes `[uu, ul, lu, ll]`,
/// from the partial transpose built by hand and diagonalized as the real
/// 8×8 embedding `[[Re, −Im], [Im, Re]]` (each eigenvalue appears twice).
pub fn negativity_oracle(amps: [(f64, f64); 4]) -> f64 {
    // ρ_{(ij),(kl)} = a_ij · conj(a_kl); transpose the second index: (i l),(k j).
    let idx = |i: usize, j: usize| 2 * i + j;
    let mut re = vec![vec![0.0; 4]; 4];
    let mut im = vec![vec![0.0; 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    let (ar, ai) = amps[idx(i, j)];
                    let (br, bi) = amps[idx(k, l)];
                    re[idx(i, l)][idx(k, j)] = ar * br + ai * bi;
                    im[idx(i, l)][idx(k, j)] = ai * br - ar * bi;
                }
            }
        }
    }
    let mut m = vec![vec![0.0; 8]; 8];
    for r in 0..4 {
        for c in 0..4 {
            m[r][c] = re[r][c];
            m[r + 4][c + 4] = re[r][c];
            m[r][c + 4] = -im[r][c];
            m[r + 4][c] = im[r][c];
        }
    }
    let neg: f64 = jacobi_eigenvalues(m).iter().filter(|&&e| e < 0.0).sum();
    -neg / 2.0
}
