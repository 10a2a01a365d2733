use std::str::FromStr;

use crate::error::{Error, Result};
use crate::harness::{generate_sequence, Spectrum, SystemSequence};

/// Parameters of `--gen n=..,m=..,eps=..,seed=..,spectrum=..,kappa=..`.
/// Unset keys take the standard benchmark values.
#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub n: usize,
    pub m: usize,
    pub eps: f64,
    pub seed: Option<u64>,
    pub spectrum: Spectrum,
}

impl Default for GenSpec {
    fn default() -> Self {
        GenSpec { n: 200, m: 20, eps: 1e-4, seed: None, spectrum: Spectrum::Indefinite }
    }
}

fn bad(key: &str, value: &str) -> Error {
    Error::InvalidParameter(format!("--gen: bad value '{value}' for {key}"))
}

impl FromStr for GenSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut spec = GenSpec::default();
        let mut kappa: Option<f64> = None;
        for item in s.split(',').map(str::trim).filter(|i| !i.is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::InvalidParameter(format!("--gen: expected key=value, got '{item}'")))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "n" => spec.n = value.parse().map_err(|_| bad(key, value))?,
                "m" => spec.m = value.parse().map_err(|_| bad(key, value))?,
                "eps" => spec.eps = value.parse().map_err(|_| bad(key, value))?,
                "seed" => spec.seed = Some(value.parse().map_err(|_| bad(key, value))?),
                "spectrum" => spec.spectrum = value.parse()?,
                "kappa" => kappa = Some(value.parse().map_err(|_| bad(key, value))?),
                _ => return Err(Error::InvalidParameter(format!("--gen: unknown key '{key}'"))),
            }
        }
        if let Some(k) = kappa {
            match spec.spectrum {
                Spectrum::Ill(_) => spec.spectrum = format!("ill:{k}").parse()?,
                _ => return Err(Error::InvalidParameter("--gen: kappa requires spectrum=ill".into())),
            }
        }
        Ok(spec)
    }
}

impl GenSpec {
    /// Generates the sequence; `seed=` in the spec overrides `default_seed`.
    pub fn generate(&self, default_seed: u64) -> Result<SystemSequence> {
        generate_sequence(self.n, self.m, self.eps, self.spectrum, self.seed.unwrap_or(default_seed))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        assert_eq!("".parse::<GenSpec>().unwrap(), GenSpec::default());
        let s: GenSpec = "n=50, m=3,eps=0,seed=9,spectrum=spd".parse().unwrap();
        assert_eq!(s, GenSpec { n: 50, m: 3, eps: 0.0, seed: Some(9), spectrum: Spectrum::Spd });
        let k: GenSpec = "spectrum=ill,kappa=100".parse().unwrap();
        assert_eq!(k.spectrum, Spectrum::Ill(100.0));
    }

    #[test]
    fn rejects_bad_input() {
        for s in ["n=abc", "size=3", "n", "kappa=10", "spectrum=spd,kappa=10", "spectrum=odd"] {
            assert!(s.parse::<GenSpec>().is_err(), "{s}");
        }
    }

    #[test]
    fn seed_override() {
        let a = "n=20,m=2,seed=4".parse::<GenSpec>().unwrap().generate(1).unwrap();
        let b = "n=20,m=2".parse::<GenSpec>().unwrap().generate(4).unwrap();
        assert_eq!(a.systems(), b.systems());
    }
}
