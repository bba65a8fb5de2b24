use std::collections::BTreeMap;
use std::path::PathBuf;

use isosec_core::sphere::Cap;
use isosec_core::Vector;

use crate::CliError;

/// Tolerances used for pass/fail decisions.
#[derive(Clone, Debug, PartialEq)]
pub struct Tolerances {
    pub newton: f64,
    pub af: f64,
    pub sr_l1: f64,
    pub sr_identity: f64,
    pub sr_exact: f64,
    pub sr_average: f64,
    pub lemma41_gap: f64,
    pub lemma41_dev: f64,
    pub fourier: f64,
    pub isotropy: f64,
    pub funk_gap: f64,
    pub variance_ratio: f64,
    pub rigidity: f64,
    pub even_shift: f64,
    pub minkowski: f64,
    pub mass_outside: f64,
    pub umbilic: f64,
    pub umbilic_ball: f64,
    pub umbilic_split: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            newton: 1e-10,
            af: 1e-9,
            sr_l1: 1e-10,
            sr_identity: 1e-6,
            sr_exact: 1e-12,
            sr_average: 1e-6,
            lemma41_gap: 1e-8,
            lemma41_dev: 1e-4,
            fourier: 1e-6,
            isotropy: 1e-5,
            funk_gap: 5e-3,
            variance_ratio: 0.1,
            rigidity: 1e-4,
            even_shift: 1e-6,
            minkowski: 1e-6,
            mass_outside: 1e-8,
            umbilic: 1e-4,
            umbilic_ball: 1e-10,
            umbilic_split: 1e-2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub n_theta: usize,
    pub n_phi: usize,
    pub band: usize,
    pub circle_m: usize,
    pub u_center: Vector,
    pub u_height: f64,
    pub v_center: Vector,
    pub v_height: f64,
    /// `None` means half the cap separation.
    pub transition: Option<f64>,
    pub samples: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub tol: Tolerances,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n_theta: 64,
            n_phi: 128,
            band: 48,
            circle_m: 256,
            u_center: Vector::basis(2),
            u_height: 0.8,
            v_center: Vector::basis(0),
            v_height: 0.8,
            transition: None,
            samples: 50,
            seed: 1,
            out: PathBuf::from("isosec-out"),
            tol: Tolerances::default(),
        }
    }
}

fn bad(key: &str, value: &str, why: &str) -> CliError {
    CliError::Input(format!("config key `{key}` = `{value}`: {why}"))
}

fn parse_num<N: std::str::FromStr>(key: &str, value: &str) -> Result<N, CliError> {
    value.parse().map_err(|_| bad(key, value, "not a number"))
}

fn parse_vector(key: &str, value: &str) -> Result<Vector, CliError> {
    let parts: Vec<f64> = value
        .split(',')
        .map(|s| parse_num(key, s.trim()))
        .collect::<Result<_, _>>()?;
    if parts.len() != 3 {
        return Err(bad(key, value, "expected three comma-separated components"));
    }
    let v = Vector::new(parts[0], parts[1], parts[2]);
    if !(v.norm() > 0.0) || !v.norm().is_finite() {
        return Err(bad(key, value, "vector must be non-zero and finite"));
    }
    Ok(v.normalized())
}

impl RunConfig {
    /// Parse a `key = value` file on top of the defaults. Blank lines and
    /// lines starting with `#` are skipped; unknown keys are errors.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Input(format!("config line {}: expected key = value", n + 1)))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| CliError::Input(format!("config line {}: {}", n + 1, e.message())))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let t = &mut self.tol;
        let tol_slot = match key {
            "tol_newton" => Some(&mut t.newton),
            "tol_af" => Some(&mut t.af),
            "tol_sr_l1" => Some(&mut t.sr_l1),
            "tol_sr_identity" => Some(&mut t.sr_identity),
            "tol_sr_exact" => Some(&mut t.sr_exact),
            "tol_sr_average" => Some(&mut t.sr_average),
            "tol_lemma41_gap" => Some(&mut t.lemma41_gap),
            "tol_lemma41_dev" => Some(&mut t.lemma41_dev),
            "tol_fourier" => Some(&mut t.fourier),
            "tol_isotropy" => Some(&mut t.isotropy),
            "tol_funk_gap" => Some(&mut t.funk_gap),
            "tol_variance_ratio" => Some(&mut t.variance_ratio),
            "tol_rigidity" => Some(&mut t.rigidity),
            "tol_even_shift" => Some(&mut t.even_shift),
            "tol_minkowski" => Some(&mut t.minkowski),
            "tol_mass_outside" => Some(&mut t.mass_outside),
            "tol_umbilic" => Some(&mut t.umbilic),
            "tol_umbilic_ball" => Some(&mut t.umbilic_ball),
            "tol_umbilic_split" => Some(&mut t.umbilic_split),
            _ => None,
        };
        if let Some(slot) = tol_slot {
            let v: f64 = parse_num(key, value)?;
            if !(v > 0.0) || !v.is_finite() {
                return Err(bad(key, value, "tolerances must be positive"));
            }
            *slot = v;
            return Ok(());
        }
        match key {
            "n_theta" => self.n_theta = parse_num(key, value)?,
            "n_phi" => self.n_phi = parse_num(key, value)?,
            "band" => self.band = parse_num(key, value)?,
            "circle_m" => self.circle_m = parse_num(key, value)?,
            "u_center" => self.u_center = parse_vector(key, value)?,
            "u_height" => self.u_height = parse_num(key, value)?,
            "v_center" => self.v_center = parse_vector(key, value)?,
            "v_height" => self.v_height = parse_num(key, value)?,
            "transition" => {
                self.transition = if value == "auto" {
                    None
                } else {
                    Some(parse_num(key, value)?)
                };
            }
            "samples" => self.samples = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "out" => self.out = PathBuf::from(value),
            _ => return Err(CliError::Input(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        for (name, a) in [("u_height", self.u_height), ("v_height", self.v_height)] {
            if !(a > 0.0 && a < 1.0) {
                return Err(CliError::Input(format!("{name} must lie in (0, 1), got {a}")));
            }
        }
        if let Some(t) = self.transition {
            if !(t > 0.0) {
                return Err(CliError::Input(format!("transition must be positive, got {t}")));
            }
        }
        if self.samples == 0 {
            return Err(CliError::Input("samples must be positive".into()));
        }
        if self.circle_m < 8 {
            return Err(CliError::Input(format!(
                "circle_m must be at least 8, got {}",
                self.circle_m
            )));
        }
        if self.n_theta < 2 || self.n_phi < 4 || self.n_phi % 2 == 1 {
            return Err(CliError::Input(format!(
                "grid {}x{} invalid (need n_theta >= 2 and even n_phi >= 4)",
                self.n_theta, self.n_phi
            )));
        }
        Ok(())
    }

    pub fn u_cap(&self) -> Cap<f64> {
        Cap::new(self.u_center, self.u_height)
    }

    pub fn v_cap(&self) -> Cap<f64> {
        Cap::new(self.v_center, self.v_height)
    }

    /// Every setting as a string, for the report header.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let vec = |v: &Vector| format!("{},{},{}", v.x(), v.y(), v.z());
        let t = &self.tol;
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("n_theta", self.n_theta.to_string());
        put("n_phi", self.n_phi.to_string());
        put("band", self.band.to_string());
        put("circle_m", self.circle_m.to_string());
        put("u_center", vec(&self.u_center));
        put("u_height", self.u_height.to_string());
        put("v_center", vec(&self.v_center));
        put("v_height", self.v_height.to_string());
        put("transition", self.transition.map_or("auto".into(), |t| t.to_string()));
        put("samples", self.samples.to_string());
        put("seed", self.seed.to_string());
        put("out", self.out.display().to_string());
        for (k, v) in [
            ("tol_newton", t.newton),
            ("tol_af", t.af),
            ("tol_sr_l1", t.sr_l1),
            ("tol_sr_identity", t.sr_identity),
            ("tol_sr_exact", t.sr_exact),
            ("tol_sr_average", t.sr_average),
            ("tol_lemma41_gap", t.lemma41_gap),
            ("tol_lemma41_dev", t.lemma41_dev),
            ("tol_fourier", t.fourier),
            ("tol_isotropy", t.isotropy),
            ("tol_funk_gap", t.funk_gap),
            ("tol_variance_ratio", t.variance_ratio),
            ("tol_rigidity", t.rigidity),
            ("tol_even_shift", t.even_shift),
            ("tol_minkowski", t.minkowski),
            ("tol_mass_outside", t.mass_outside),
            ("tol_umbilic", t.umbilic),
            ("tol_umbilic_ball", t.umbilic_ball),
            ("tol_umbilic_split", t.umbilic_split),
        ] {
            put(k, format!("{v:e}"));
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_overrides() {
        let cfg = RunConfig::parse("# comment\nband = 16\nu_center = 0, 0, 2\ntol_af=1e-7\n").unwrap();
        assert_eq!(cfg.band, 16);
        assert_eq!(cfg.u_center, Vector::basis(2));
        assert_eq!(cfg.tol.af, 1e-7);
    }

    #[test]
    fn unknown_key_is_an_error() {
        let err = RunConfig::parse("bnad = 3").unwrap_err();
        assert!(err.to_string().contains("unknown config key"));
        assert!(err.to_string().contains("line 1"));
    }

    #[test]
    fn rejects_bad_values() {
        assert!(RunConfig::parse("u_height = 1.5").is_err());
        assert!(RunConfig::parse("tol_newton = 0").is_err());
        assert!(RunConfig::parse("u_center = 1,2").is_err());
        assert!(RunConfig::parse("band").is_err());
    }

    #[test]
    fn echo_is_sorted_and_complete() {
        let e = RunConfig::default().echo();
        assert_eq!(e["band"], "48");
        assert_eq!(e["transition"], "auto");
        let keys: Vec<_> = e.keys().cloned().collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }
}
