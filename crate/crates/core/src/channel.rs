//! Distance-only RF and FSO rate models and the hybrid link that takes the
//! better of the two.
//!
//! All distances are in meters. The RF reference SNR is referenced to 1 m.
//! FSO attenuation follows Beer-Lambert with the Kim visibility model, and
//! the FSO rate is the intensity-modulated capacity lower bound with the
//! average-to-peak ratio selecting the k1 branch.

use std::f64::consts::{E, LOG10_E, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the configured ASNR in dB maps to the squared optical SNR used by
/// the capacity bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AsnrConvention {
    /// `gamma_fso^2 = 10^(dB/10)`.
    #[default]
    SquaredRatio,
    /// `gamma_fso = 10^(dB/10)`, so `gamma_fso^2 = 10^(dB/5)`.
    Ratio,
}

impl AsnrConvention {
    pub fn squared_from_db(self, db: f64) -> f64 {
        match self {
            AsnrConvention::SquaredRatio => 10f64.powf(db / 10.0),
            AsnrConvention::Ratio => 10f64.powf(db / 5.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LinkType {
    Rf,
    Fso,
}

impl LinkType {
    pub fn as_str(self) -> &'static str {
        match self {
            LinkType::Rf => "RF",
            LinkType::Fso => "FSO",
        }
    }
}

/// User-facing channel settings; see [`ChannelParams::new`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSettings {
    pub bandwidth_rf_hz: f64,
    pub bandwidth_fso_hz: f64,
    /// Linear reference SNR at 1 m.
    pub gamma0: f64,
    pub visibility_km: f64,
    pub wavelength_nm: f64,
    pub asnr_db: f64,
    #[serde(default)]
    pub asnr_convention: AsnrConvention,
    /// Average-to-peak optical power ratio.
    pub apr_alpha: f64,
}

impl Default for ChannelSettings {
    fn default() -> Self {
        ChannelSettings {
            bandwidth_rf_hz: 1e9,
            bandwidth_fso_hz: 1e9,
            gamma0: 1e9,
            visibility_km: 15.0,
            wavelength_nm: 1550.0,
            asnr_db: 25.0,
            asnr_convention: AsnrConvention::SquaredRatio,
            apr_alpha: 0.1,
        }
    }
}

/// Channel constants with the derived FSO terms filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelParams {
    pub bandwidth_rf: f64,
    pub bandwidth_fso: f64,
    pub gamma0: f64,
    pub visibility_km: f64,
    pub wavelength_nm: f64,
    /// Squared average optical SNR (linear).
    pub asnr_squared: f64,
    pub alpha: f64,
    pub beta_db_per_km: f64,
    /// Attenuation coefficient (1/m).
    pub beta: f64,
    pub k1: f64,
    /// `2 * beta` (1/m).
    pub k2: f64,
}

impl ChannelParams {
    pub fn new(s: &ChannelSettings) -> Result<Self> {
        let positive = [
            ("bandwidth_rf_hz", s.bandwidth_rf_hz),
            ("bandwidth_fso_hz", s.bandwidth_fso_hz),
            ("gamma0", s.gamma0),
            ("visibility_km", s.visibility_km),
            ("wavelength_nm", s.wavelength_nm),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("channel.{name} must be positive, got {v}")));
            }
        }
        if !(s.apr_alpha > 0.0 && s.apr_alpha < 1.0) || s.apr_alpha == 0.5 {
            return Err(Error::Config(format!(
                "channel.apr_alpha must lie in (0, 1) excluding 1/2, got {}",
                s.apr_alpha
            )));
        }
        let asnr_squared = s.asnr_convention.squared_from_db(s.asnr_db);
        let (beta_db_per_km, beta) = kim_attenuation(s.visibility_km, s.wavelength_nm)?;
        let k1 = fso_k1(s.apr_alpha, asnr_squared)?;
        Ok(ChannelParams {
            bandwidth_rf: s.bandwidth_rf_hz,
            bandwidth_fso: s.bandwidth_fso_hz,
            gamma0: s.gamma0,
            visibility_km: s.visibility_km,
            wavelength_nm: s.wavelength_nm,
            asnr_squared,
            alpha: s.apr_alpha,
            beta_db_per_km,
            beta,
            k1,
            k2: 2.0 * beta,
        })
    }
}

fn check_distance(d: f64) -> Result<()> {
    if d > 0.0 && !d.is_nan() {
        Ok(())
    } else {
        Err(Error::invalid(format!("link distance must be positive, got {d}")))
    }
}

/// RF rate in bps at distance `d` meters.
pub fn rf_rate(d: f64, p: &ChannelParams) -> Result<f64> {
    check_distance(d)?;
    Ok(p.bandwidth_rf * (p.gamma0 / (d * d)).ln_1p() / std::f64::consts::LN_2)
}

/// Kim-model size distribution coefficient for visibility `v_km`.
pub fn kim_exponent(v_km: f64) -> f64 {
    if v_km > 50.0 {
        1.6
    } else if v_km > 6.0 {
        1.3
    } else if v_km > 1.0 {
        0.16 * v_km + 0.34
    } else if v_km > 0.5 {
        v_km - 0.5
    } else {
        0.0
    }
}

/// Atmospheric attenuation: returns `(beta_dB [dB/km], beta [1/m])`.
pub fn kim_attenuation(v_km: f64, wavelength_nm: f64) -> Result<(f64, f64)> {
    if !(v_km > 0.0) {
        return Err(Error::invalid(format!("visibility must be positive, got {v_km}")));
    }
    let p = kim_exponent(v_km);
    let beta_db = (3.91 / v_km) * (wavelength_nm / 550.0).powf(-p);
    Ok((beta_db, beta_db / (1e4 * LOG10_E)))
}

/// `1/mu - e^-mu / (1 - e^-mu)`; tends to 1/2 as mu -> 0 and decreases
/// monotonically to 0.
pub fn apr_relation(mu: f64) -> f64 {
    if mu < 1e-4 {
        // series: 1/2 - mu/12 + mu^3/720
        0.5 - mu / 12.0 + mu.powi(3) / 720.0
    } else {
        1.0 / mu - 1.0 / mu.exp_m1()
    }
}

/// Solves `alpha = 1/mu - e^-mu/(1 - e^-mu)` for `mu > 0` by bisection.
pub fn solve_mu_star(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::invalid(format!("alpha must lie in (0, 1/2), got {alpha}")));
    }
    let (mut lo, mut hi) = (1e-9, 1e3);
    let f = |mu: f64| apr_relation(mu) - alpha;
    if f(lo) < 0.0 || f(hi) > 0.0 {
        return Err(Error::NoConvergence(format!("alpha {alpha} not bracketed on [1e-9, 1e3]")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.max(1.0) {
            break;
        }
    }
    let mu = 0.5 * (lo + hi);
    let residual = f(mu).abs();
    if residual < 1e-10 {
        Ok(mu)
    } else {
        Err(Error::NoConvergence(format!("residual {residual:e} at mu {mu}")))
    }
}

/// ASNR-dependent constant of the FSO capacity bound.
pub fn fso_k1(alpha: f64, asnr_squared: f64) -> Result<f64> {
    if alpha == 0.5 {
        return Err(Error::invalid("alpha = 1/2 is the boundary between k1 branches"));
    }
    if alpha > 0.0 && alpha < 0.5 {
        let mu = solve_mu_star(alpha)?;
        let shape = (1.0 - (-mu).exp()) / mu;
        Ok((2.0 * alpha * mu).exp() / (2.0 * PI * E) * shape * shape * asnr_squared / (alpha * alpha))
    } else if alpha > 0.5 && alpha < 1.0 {
        Ok(asnr_squared / (2.0 * PI * E * alpha * alpha))
    } else {
        Err(Error::invalid(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

/// FSO rate in bps at distance `d` meters.
pub fn fso_rate(d: f64, p: &ChannelParams) -> Result<f64> {
    check_distance(d)?;
    Ok(0.5 * p.bandwidth_fso * (p.k1 * (-p.k2 * d).exp()).ln_1p() / std::f64::consts::LN_2)
}

/// Better of RF and FSO at distance `d`; ties go to FSO.
pub fn hybrid_rate(d: f64, p: &ChannelParams) -> Result<(f64, LinkType)> {
    let rf = rf_rate(d, p)?;
    let fso = fso_rate(d, p)?;
    Ok(if fso >= rf { (fso, LinkType::Fso) } else { (rf, LinkType::Rf) })
}

/// Root of `fso_rate - rf_rate` within `[lo, hi]` meters. Bisection runs
/// well past 1 m so the residual rate gap is below 1 bps.
pub fn crossover_distance(p: &ChannelParams, lo: f64, hi: f64) -> Result<f64> {
    check_distance(lo)?;
    if !(hi > lo) {
        return Err(Error::invalid(format!("empty bracket [{lo}, {hi}]")));
    }
    let gap = |d: f64| -> Result<f64> { Ok(fso_rate(d, p)? - rf_rate(d, p)?) };
    let (mut a, mut b) = (lo, hi);
    let mut ga = gap(a)?;
    let gb = gap(b)?;
    if ga == 0.0 {
        return Ok(a);
    }
    if gb == 0.0 {
        return Ok(b);
    }
    if ga.signum() == gb.signum() {
        return Err(Error::NoSignChange { what: "fso_rate - rf_rate", lo, hi });
    }
    while b - a > 1e-12 * b.max(1.0) {
        let m = 0.5 * (a + b);
        let gm = gap(m)?;
        if gm == 0.0 {
            return Ok(m);
        }
        if gm.signum() == ga.signum() {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// A located crossing between the FSO and RF rate curves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossover {
    pub distance: f64,
    /// Which link is better just below `distance`.
    pub better_below: LinkType,
}

/// Scans `[lo, hi]` on a log grid and refines every sign change of
/// `fso_rate - rf_rate`.
pub fn find_crossovers(p: &ChannelParams, lo: f64, hi: f64, samples: usize) -> Result<Vec<Crossover>> {
    check_distance(lo)?;
    let samples = samples.max(2);
    let ratio = (hi / lo).ln();
    let grid: Vec<f64> = (0..samples)
        .map(|i| lo * (ratio * i as f64 / (samples - 1) as f64).exp())
        .collect();
    let mut out = Vec::new();
    for w in grid.windows(2) {
        let ga = fso_rate(w[0], p)? - rf_rate(w[0], p)?;
        let gb = fso_rate(w[1], p)? - rf_rate(w[1], p)?;
        if ga != 0.0 && ga.signum() != gb.signum() {
            out.push(Crossover {
                distance: crossover_distance(p, w[0], w[1])?,
                better_below: if ga > 0.0 { LinkType::Fso } else { LinkType::Rf },
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table_params() -> ChannelParams {
        ChannelParams::new(&ChannelSettings::default()).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn rf_reference_values() {
        let p = table_params();
        assert!(rel(rf_rate(1.0, &p).unwrap(), 29_897_352_855.428_956) < 1e-12);
        assert!(rel(rf_rate(1000.0, &p).unwrap(), 9_967_226_258.835_994) < 1e-12);
        assert!(rf_rate(1e13, &p).unwrap() < 1e-6);
        assert!(rf_rate(0.0, &p).is_err());
        assert!(rf_rate(-3.0, &p).is_err());
    }

    #[test]
    fn kim_values_and_branches() {
        let (db, beta) = kim_attenuation(15.0, 1550.0).unwrap();
        assert!(rel(db, 0.067_783_780_501_408_78) < 1e-12);
        assert!(rel(beta, 1.560_779_225_293_243e-5) < 1e-12);
        let (db, _) = kim_attenuation(7.0, 550.0).unwrap();
        assert_eq!(db, 3.91 / 7.0);
        assert!(kim_attenuation(0.0, 1550.0).is_err());

        let table = [(60.0, 1.6), (50.0, 1.3), (6.5, 1.3), (6.0, 0.16 * 6.0 + 0.34), (1.0, 0.5), (0.75, 0.25), (0.5, 0.0)];
        for (v, p) in table {
            assert!((kim_exponent(v) - p).abs() < 1e-12, "V = {v}");
        }
    }

    #[test]
    fn mu_star_values() {
        assert!((solve_mu_star(0.1).unwrap() - 9.995_441_133_814_842_7).abs() < 1e-9);
        assert!((solve_mu_star(0.25).unwrap() - 3.593_511_969_447_426).abs() < 1e-9);
        assert!((solve_mu_star(0.4).unwrap() - 1.229_933_200_381_957_5).abs() < 1e-9);
        assert!(solve_mu_star(0.499_999).unwrap() < 1e-4);
        assert!(solve_mu_star(0.5).is_err());
        assert!(solve_mu_star(0.0).is_err());
    }

    #[test]
    fn k1_branches() {
        assert!(rel(fso_k1(0.75, 10.0).unwrap(), 1.040_885_893_765_674) < 1e-12);
        let p = table_params();
        assert!(rel(p.k1, 136.796_532_431_267_81) < 1e-9);
        assert!(fso_k1(0.5, 10.0).is_err());
        let bad = ChannelSettings { apr_alpha: 0.5, ..ChannelSettings::default() };
        assert!(ChannelParams::new(&bad).is_err());
    }

    #[test]
    fn fso_landmarks() {
        let p = table_params();
        let near = fso_rate(1e-9, &p).unwrap();
        assert!(rel(near, 0.5e9 * (1.0 + p.k1).log2()) < 1e-9);
        let d_half = p.k1.ln() / p.k2;
        assert!(rel(fso_rate(d_half, &p).unwrap(), 0.5e9) < 1e-9);
        assert!(fso_rate(2.0e6, &p).unwrap() > fso_rate(3.0e6, &p).unwrap());
    }

    #[test]
    fn hybrid_prefers_fso_on_ties() {
        let mut p = table_params();
        // force identical curves at one distance
        p.k1 = 0.0;
        p.gamma0 = 0.0;
        assert_eq!(hybrid_rate(10.0, &p).unwrap().1, LinkType::Fso);
    }

    #[test]
    fn crossover_requires_sign_change() {
        let p = table_params();
        assert!(matches!(
            crossover_distance(&p, 1.0e6, 2.0e6),
            Err(Error::NoSignChange { .. })
        ));
        let found = find_crossovers(&p, 1e3, 6e6, 2000).unwrap();
        assert!(!found.is_empty());
        for c in found {
            let gap = fso_rate(c.distance, &p).unwrap() - rf_rate(c.distance, &p).unwrap();
            assert!(gap.abs() < 1.0, "gap {gap} at {}", c.distance);
        }
    }

    #[test]
    fn crossings_at_100_db() {
        // independent 40-digit bisection
        let p = ChannelParams::new(&ChannelSettings { gamma0: 1e10, ..ChannelSettings::default() }).unwrap();
        let found = find_crossovers(&p, 1.0, 6e6, 20_000).unwrap();
        assert_eq!(found.len(), 2);
        assert!(rel(found[0].distance, 45_456.776_956) < 1e-7);
        assert_eq!(found[0].better_below, LinkType::Rf);
        assert!(rel(found[1].distance, 159_546.694_824) < 1e-7);
        assert_eq!(found[1].better_below, LinkType::Fso);
        assert!(rel(p.k1, 136.796_532_431_267_8) < 1e-9);
    }

    #[test]
    fn asnr_conventions() {
        assert!(rel(AsnrConvention::SquaredRatio.squared_from_db(25.0), 316.227_766_016_837_9) < 1e-12);
        assert!(rel(AsnrConvention::Ratio.squared_from_db(25.0), 1e5) < 1e-12);
    }
}
