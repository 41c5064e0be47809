//! Closed-form single-excitation solutions of the chiral master equation.
//!
//! Amplitudes follow the no-jump evolution from |eg> (c_eg(0) = 1, c_ge(0) = 0):
//!   dc_eg/dt = -gamma_L e^{ikd} c_ge - gamma_bar c_eg - i (Omega/2) c_gg
//!   dc_ge/dt = -gamma_R e^{ikd} c_eg - gamma_bar c_ge
//!   dc_gg/dt = -i (Omega/2) c_eg
//! Jump terms only repopulate |gg>, so the eg/ge coherence of the Lindblad state is c_eg c_ge^*.

use nalgebra::Matrix3;

use crate::error::{bad_param, Error, Result};
use crate::quantum::{c, r, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorreyRoots {
    pub s: [C64; 3],
    pub a_coeffs: [f64; 3],
    pub gamma_bar: f64,
}

fn check_rates(gamma_l: f64, gamma_r: f64) -> Result<()> {
    if !(gamma_l >= 0.0) || !(gamma_r >= 0.0) || !gamma_l.is_finite() || !gamma_r.is_finite() {
        return Err(bad_param("gamma_l/gamma_r", "rates must be finite and >= 0"));
    }
    Ok(())
}

/// Undriven amplitudes. gamma_L = 0 is a dedicated branch (no sqrt(gamma_R/gamma_L)).
pub fn analytic_undriven_amplitudes(gamma_l: f64, gamma_r: f64, kd: f64, t: f64) -> Result<(C64, C64)> {
    check_rates(gamma_l, gamma_r)?;
    let gbar = 0.5 * (gamma_l + gamma_r);
    let x = C64::from_polar(1.0, kd);
    let decay = (-gbar * t).exp();
    if gamma_l == 0.0 {
        return Ok((r(decay), -x * gamma_r * t * decay));
    }
    let alpha = (gamma_l * gamma_r).sqrt();
    let z = x * alpha * t;
    let ratio = (gamma_r / gamma_l).sqrt();
    Ok((z.cosh() * decay, -z.sinh() * ratio * decay))
}

/// C(t) = 2 |c_eg c_ge^*| from the undriven amplitudes.
pub fn analytic_concurrence_undriven(gamma_l: f64, gamma_r: f64, kd: f64, t: f64) -> Result<f64> {
    let (a, b) = analytic_undriven_amplitudes(gamma_l, gamma_r, kd, t)?;
    Ok(2.0 * (a * b.conj()).norm())
}

/// Printed main-text closed form with an adjustable overall factor (1 is the correct one).
pub fn eq5_concurrence(gamma_l: f64, gamma_r: f64, kd: f64, t: f64, prefactor: f64) -> f64 {
    let gbar = 0.5 * (gamma_l + gamma_r);
    if gamma_l == 0.0 {
        return prefactor * 2.0 * gamma_r * t * (-2.0 * gbar * t).exp();
    }
    let a1 = 2.0 * (gamma_l * gamma_r).sqrt() * kd.cos();
    let a2 = 2.0 * (gamma_l * gamma_r).sqrt() * kd.sin();
    prefactor
        * (-2.0 * gbar * t).exp()
        * (gamma_r / gamma_l).sqrt()
        * ((a1 * t).sinh().powi(2) + (a2 * t).sin().powi(2)).sqrt()
}

/// (Z1, Z2) = real and imaginary parts of e^{-ikd} rho_{eg,ge}; concurrence = 2 sqrt(Z1^2 + Z2^2).
pub fn analytic_me_coherences_undriven(gamma_l: f64, gamma_r: f64, kd: f64, t: f64) -> Result<(f64, f64)> {
    check_rates(gamma_l, gamma_r)?;
    if gamma_l == 0.0 {
        return Err(bad_param("gamma_l", "closed form requires gamma_L > 0"));
    }
    let gbar = 0.5 * (gamma_l + gamma_r);
    let alpha = (gamma_l * gamma_r).sqrt();
    let a1 = 2.0 * alpha * kd.cos();
    let a2 = 2.0 * alpha * kd.sin();
    let k = (gamma_r / (4.0 * gamma_l)).sqrt() * (-2.0 * gbar * t).exp();
    let (sh, s) = ((a1 * t).sinh(), (a2 * t).sin());
    let z1 = -k * (kd.cos() * sh - kd.sin() * s);
    let z2 = k * (kd.sin() * sh + kd.cos() * s);
    Ok((z1, z2))
}

/// Perfectly chiral (gamma_L = 0), emitter 1 driven with Omega, from |eg>.
pub fn analytic_single_driven_chiral(omega: f64, gamma_r: f64, kd: f64, t: f64) -> Result<(C64, C64, f64)> {
    check_rates(0.0, gamma_r)?;
    if omega == 0.0 {
        let (a, b) = analytic_undriven_amplitudes(0.0, gamma_r, kd, t)?;
        return Ok((a, b, 2.0 * (a * b.conj()).norm()));
    }
    let gbar = 0.5 * gamma_r;
    let a = 0.5 * gbar;
    let b = c(a * a - 0.25 * omega * omega, 0.0).sqrt();
    let bt = b * t;
    // sinh(bt)/b, regular at b -> 0
    let shb = if b.norm() < 1e-8 { r(t) } else { bt.sinh() / b };
    let ea = (-a * t).exp();
    let c_eg = (bt.cosh() - shb * a) * ea;
    let o2 = omega * omega;
    let c_ge = -C64::from_polar(gamma_r, kd)
        * ea
        * (shb * (1.0 - 2.0 * gbar * gbar / o2) - (r(ea) - bt.cosh()) * (4.0 * gbar / o2));
    Ok((c_eg, c_ge, 2.0 * (c_eg * c_ge.conj()).norm()))
}

/// O(Omega^2) roots of s (s + gamma_bar)^2 - gamma_L gamma_R s + (Omega^2/4)(s + gamma_bar).
pub fn torrey_roots_weak_driving(gamma_l: f64, gamma_r: f64, omega: f64) -> Result<TorreyRoots> {
    check_rates(gamma_l, gamma_r)?;
    if gamma_l == 0.0 || gamma_r == 0.0 {
        return Err(Error::Singular {
            name: "A(s1)".into(),
            reason: "gamma_L gamma_R = 0 makes s1 = 0 coincide with s0".into(),
        });
    }
    if (gamma_l - gamma_r).abs() < 1e-12 {
        return Err(Error::Singular {
            name: "A(s0)".into(),
            reason: "gamma_L = gamma_R makes (gamma_L - gamma_R)^2 vanish".into(),
        });
    }
    let gbar = 0.5 * (gamma_l + gamma_r);
    let alpha = (gamma_l * gamma_r).sqrt();
    let s0 = [0.0, -gbar + alpha, -gbar - alpha];
    let a_coeffs = [
        -gbar / (gamma_l - gamma_r).powi(2),
        1.0 / (4.0 * (gamma_l.sqrt() - gamma_r.sqrt()).powi(2)),
        1.0 / (4.0 * (gamma_l.sqrt() + gamma_r.sqrt()).powi(2)),
    ];
    let o2 = omega * omega;
    Ok(TorreyRoots {
        s: [0, 1, 2].map(|k| r(s0[k] + a_coeffs[k] * o2)),
        a_coeffs,
        gamma_bar: gbar,
    })
}

/// Cubic of the weak-driving Torrey determinant at kd = 0 (mod pi).
pub fn torrey_determinant(gamma_l: f64, gamma_r: f64, omega: f64, s: C64) -> C64 {
    let gbar = 0.5 * (gamma_l + gamma_r);
    s * (s + gbar) * (s + gbar) - s * gamma_l * gamma_r + (s + gbar) * (0.25 * omega * omega)
}

/// Exact roots of the same cubic from its companion matrix.
pub fn torrey_exact_roots(gamma_l: f64, gamma_r: f64, omega: f64) -> [C64; 3] {
    let gbar = 0.5 * (gamma_l + gamma_r);
    let c2 = 2.0 * gbar;
    let c1 = gbar * gbar - gamma_l * gamma_r + 0.25 * omega * omega;
    let c0 = 0.25 * omega * omega * gbar;
    let comp = Matrix3::new(-c2, -c1, -c0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0);
    let ev = comp.complex_eigenvalues();
    let mut out = [ev[0], ev[1], ev[2]];
    out.sort_by(|a, b| b.re.partial_cmp(&a.re).unwrap());
    out
}

/// Three-exponential amplitudes from the residues of s(s+gamma_bar)/D(s) and -gamma_R e^{ikd} s/D(s).
pub fn analytic_weak_driving_amplitudes(
    roots: &TorreyRoots,
    gamma_l: f64,
    gamma_r: f64,
    kd: f64,
    t: f64,
) -> Result<(C64, C64)> {
    let _ = gamma_l;
    let s = roots.s;
    for i in 0..3 {
        for j in (i + 1)..3 {
            if (s[i] - s[j]).norm() < 1e-12 {
                return Err(Error::Singular {
                    name: format!("roots s{i}, s{j}"),
                    reason: "coincident roots".into(),
                });
            }
        }
    }
    let gbar = roots.gamma_bar;
    let x = C64::from_polar(1.0, kd);
    let mut c_eg = r(0.0);
    let mut c_ge = r(0.0);
    for i in 0..3 {
        let den: C64 = (0..3).filter(|&j| j != i).map(|j| s[i] - s[j]).product();
        let e = (s[i] * t).exp();
        c_eg += s[i] * (s[i] + gbar) / den * e;
        c_ge += -x * gamma_r * s[i] / den * e;
    }
    Ok((c_eg, c_ge))
}

/// (gamma_L, gamma_R) = (gamma_tot/2)(1 -+ sin 2 phi).
pub fn flux_to_rates(phi_flux: f64, gamma_tot: f64) -> Result<(f64, f64)> {
    if !(gamma_tot > 0.0) {
        return Err(bad_param("gamma_tot", "must be > 0"));
    }
    let s = (2.0 * phi_flux).sin();
    Ok((0.5 * gamma_tot * (1.0 - s), 0.5 * gamma_tot * (1.0 + s)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_conditions() {
        let (a, b) = analytic_undriven_amplitudes(0.3, 0.7, 0.4, 0.0).unwrap();
        assert_eq!((a, b), (r(1.0), r(0.0)));
        assert_eq!(analytic_concurrence_undriven(0.3, 0.7, 0.0, 0.0).unwrap(), 0.0);
        assert_eq!(analytic_me_coherences_undriven(0.3, 0.7, 0.2, 0.0).unwrap(), (0.0, 0.0));
        let (.., conc) = analytic_single_driven_chiral(0.3, 1.0, 0.0, 0.0).unwrap();
        assert!(conc.abs() < 1e-15);
    }

    #[test]
    fn chiral_limit_peaks_at_two_over_e() {
        let c = analytic_concurrence_undriven(0.0, 1.0, 0.0, 1.0).unwrap();
        assert!((c - 2.0 / std::f64::consts::E).abs() < 1e-14);
        let near = analytic_concurrence_undriven(1e-12, 1.0, 0.0, 1.0).unwrap();
        assert!((near - c).abs() < 1e-6);
    }

    #[test]
    fn kd_zero_has_no_z2() {
        for t in [0.3, 1.0, 4.0] {
            assert_eq!(analytic_me_coherences_undriven(0.3, 0.7, 0.0, t).unwrap().1, 0.0);
        }
    }

    #[test]
    fn flux_examples() {
        let q = std::f64::consts::FRAC_PI_4;
        let (l, rr) = flux_to_rates(q, 2.0).unwrap();
        assert!(l.abs() < 1e-15 && (rr - 2.0).abs() < 1e-15);
        assert_eq!(flux_to_rates(0.0, 2.0).unwrap(), (1.0, 1.0));
        let (l, rr) = flux_to_rates(-q, 2.0).unwrap();
        assert!((l - 2.0).abs() < 1e-15 && rr.abs() < 1e-15);
    }

    #[test]
    fn zero_drive_roots_are_unperturbed() {
        let t = torrey_roots_weak_driving(0.2, 0.8, 0.0).unwrap();
        assert_eq!(t.s[0], r(0.0));
        assert!((t.s[1].re - (-0.5 + 0.4)).abs() < 1e-12);
        assert!((t.s[2].re - (-0.5 - 0.4)).abs() < 1e-12);
        assert!(torrey_roots_weak_driving(0.5, 0.5, 0.1).is_err());
        assert!(torrey_roots_weak_driving(0.0, 1.0, 0.1).is_err());
    }
}
