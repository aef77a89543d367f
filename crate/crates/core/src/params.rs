use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Biological parameters as measured: colony composition fractions and
/// per-contact infection probabilities, before the working rescaling.
///
/// Rates are per day, populations are individuals, `k` is bees squared
/// (half-saturation constant of brood survival).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamsRaw {
    /// Maximum birth rate (bees/day).
    pub r: f64,
    /// Half-saturation of brood survival (bees^2).
    pub k: f64,
    /// Fraction of the colony that is adult bees, in [0, 1].
    pub xi_h: f64,
    /// Fraction of mites in the phoretic (riding) stage, in [0, 1].
    pub xi_m: f64,
    /// Reproduction discount of infected bees, in [0, 1].
    pub rho: f64,
    pub d_h: f64,
    pub d_m: f64,
    pub mu_h: f64,
    pub mu_m: f64,
    /// Parasitism rate per mite encounter (1/(mites*day)).
    pub alpha_hat: f64,
    /// Mites produced per parasitized bee (dimensionless).
    pub c: f64,
    /// Per-contact infection probabilities, each in (0, 1).
    pub beta_h: f64,
    pub beta_mh: f64,
    pub beta_mh2: f64,
    pub beta_hm: f64,
}

/// Working parameters after the convenience rescaling:
/// `k_hat = k / xi_h^2`, `alpha = alpha_hat (1-xi_h)(1-xi_m)`,
/// `beta_mh_hat = beta_mh xi_m`, `beta_mh_tilde = beta_mh2 alpha`,
/// `beta_hm_hat = beta_hm xi_m`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub r: f64,
    pub k_hat: f64,
    pub rho: f64,
    pub d_h: f64,
    pub d_m: f64,
    pub mu_h: f64,
    pub mu_m: f64,
    /// Effective parasitism rate.
    pub alpha: f64,
    pub c: f64,
    /// Bee-to-bee virus transmission.
    pub beta_h: f64,
    /// Frequency-dependent mite-to-bee transmission (phoretic contact).
    pub beta_mh_hat: f64,
    /// Density-dependent mite-to-bee transmission (brood-cell contact).
    pub beta_mh_tilde: f64,
    /// Bee-to-mite transmission.
    pub beta_hm_hat: f64,
}

fn check_finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParam {
            name,
            value: v,
            reason: "must be finite",
        })
    }
}

fn check_nonneg(name: &'static str, v: f64) -> Result<()> {
    check_finite(name, v)?;
    if v >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParam {
            name,
            value: v,
            reason: "must be nonnegative",
        })
    }
}

fn check_unit_interval(name: &'static str, v: f64) -> Result<()> {
    check_finite(name, v)?;
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::InvalidParam {
            name,
            value: v,
            reason: "must lie in [0, 1]",
        })
    }
}

fn check_probability_open(name: &'static str, v: f64) -> Result<()> {
    check_finite(name, v)?;
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParam {
            name,
            value: v,
            reason: "must lie strictly inside (0, 1)",
        })
    }
}

impl ParamsRaw {
    pub fn validate(&self) -> Result<()> {
        check_nonneg("r", self.r)?;
        check_finite("K", self.k)?;
        if self.k <= 0.0 {
            return Err(Error::InvalidParam {
                name: "K",
                value: self.k,
                reason: "must be positive",
            });
        }
        check_unit_interval("xi_h", self.xi_h)?;
        check_unit_interval("xi_m", self.xi_m)?;
        check_unit_interval("rho", self.rho)?;
        check_nonneg("d_h", self.d_h)?;
        check_nonneg("d_m", self.d_m)?;
        check_nonneg("mu_h", self.mu_h)?;
        check_nonneg("mu_m", self.mu_m)?;
        check_nonneg("alpha_hat", self.alpha_hat)?;
        check_nonneg("c", self.c)?;
        check_probability_open("beta_h", self.beta_h)?;
        check_probability_open("beta_mh", self.beta_mh)?;
        check_probability_open("beta_mh2", self.beta_mh2)?;
        check_probability_open("beta_hm", self.beta_hm)?;
        Ok(())
    }
}

impl Params {
    pub fn validate(&self) -> Result<()> {
        check_nonneg("r", self.r)?;
        check_finite("K_hat", self.k_hat)?;
        if self.k_hat <= 0.0 {
            return Err(Error::InvalidParam {
                name: "K_hat",
                value: self.k_hat,
                reason: "must be positive",
            });
        }
        check_unit_interval("rho", self.rho)?;
        check_nonneg("d_h", self.d_h)?;
        check_nonneg("d_m", self.d_m)?;
        check_nonneg("mu_h", self.mu_h)?;
        check_nonneg("mu_m", self.mu_m)?;
        check_nonneg("alpha", self.alpha)?;
        check_nonneg("c", self.c)?;
        check_nonneg("beta_h", self.beta_h)?;
        check_nonneg("beta_mh_hat", self.beta_mh_hat)?;
        check_nonneg("beta_mh_tilde", self.beta_mh_tilde)?;
        check_nonneg("beta_hm_hat", self.beta_hm_hat)?;
        Ok(())
    }

    /// Field access by key, matching the parameter-file spelling.
    pub fn get(&self, key: &str) -> Option<f64> {
        Some(match key {
            "r" => self.r,
            "K_hat" => self.k_hat,
            "rho" => self.rho,
            "d_h" => self.d_h,
            "d_m" => self.d_m,
            "mu_h" => self.mu_h,
            "mu_m" => self.mu_m,
            "alpha" => self.alpha,
            "c" => self.c,
            "beta_h" => self.beta_h,
            "beta_mh_hat" => self.beta_mh_hat,
            "beta_mh_tilde" => self.beta_mh_tilde,
            "beta_hm_hat" => self.beta_hm_hat,
            _ => return None,
        })
    }

    /// Set a field by key. Unknown keys are rejected; the value is not
    /// validated here (call [`Params::validate`] after the last edit).
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        match key {
            "r" => self.r = value,
            "K_hat" => self.k_hat = value,
            "rho" => self.rho = value,
            "d_h" => self.d_h = value,
            "d_m" => self.d_m = value,
            "mu_h" => self.mu_h = value,
            "mu_m" => self.mu_m = value,
            "alpha" => self.alpha = value,
            "c" => self.c = value,
            "beta_h" => self.beta_h = value,
            "beta_mh_hat" => self.beta_mh_hat = value,
            "beta_mh_tilde" => self.beta_mh_tilde = value,
            "beta_hm_hat" => self.beta_hm_hat = value,
            _ => return Err(Error::UnknownParamKey(key.to_string())),
        }
        Ok(())
    }

    pub const KEYS: [&'static str; 13] = [
        "r",
        "K_hat",
        "rho",
        "d_h",
        "d_m",
        "mu_h",
        "mu_m",
        "alpha",
        "c",
        "beta_h",
        "beta_mh_hat",
        "beta_mh_tilde",
        "beta_hm_hat",
    ];
}

/// Apply the working rescaling. Fails if `xi_h = 0` (adult fraction of zero
/// leaves the brood term undefined).
pub fn derive_params(raw: &ParamsRaw) -> Result<Params> {
    raw.validate()?;
    if raw.xi_h == 0.0 {
        return Err(Error::InvalidParam {
            name: "xi_h",
            value: 0.0,
            reason: "adult fraction must be positive to rescale K",
        });
    }
    let alpha = raw.alpha_hat * (1.0 - raw.xi_h) * (1.0 - raw.xi_m);
    let p = Params {
        r: raw.r,
        k_hat: raw.k / (raw.xi_h * raw.xi_h),
        rho: raw.rho,
        d_h: raw.d_h,
        d_m: raw.d_m,
        mu_h: raw.mu_h,
        mu_m: raw.mu_m,
        alpha,
        c: raw.c,
        beta_h: raw.beta_h,
        beta_mh_hat: raw.beta_mh * raw.xi_m,
        beta_mh_tilde: raw.beta_mh2 * alpha,
        beta_hm_hat: raw.beta_hm * raw.xi_m,
    };
    p.validate()?;
    Ok(p)
}

const RAW_ONLY_KEYS: [&str; 7] = [
    "K",
    "xi_h",
    "xi_m",
    "alpha_hat",
    "beta_mh",
    "beta_mh2",
    "beta_hm",
];
const DERIVED_ONLY_KEYS: [&str; 5] = ["K_hat", "alpha", "beta_mh_hat", "beta_mh_tilde", "beta_hm_hat"];
const SHARED_KEYS: [&str; 8] = ["r", "rho", "d_h", "d_m", "mu_h", "mu_m", "c", "beta_h"];

/// Parse a flat TOML table of numbers into working parameters.
///
/// Two key sets are accepted: the raw form (`K`, `xi_h`, `xi_m`, `alpha_hat`,
/// `beta_mh`, `beta_mh2`, `beta_hm` plus the shared rate keys), which is
/// passed through [`derive_params`], and the derived form (`K_hat`, `alpha`,
/// `beta_mh_hat`, `beta_mh_tilde`, `beta_hm_hat` plus shared). Mixing the two
/// forms in one file is an error, as is any unknown key.
pub fn params_from_toml_str(text: &str) -> Result<Params> {
    let table: toml::Table = text
        .parse()
        .map_err(|e| Error::ParamFile(format!("TOML parse error: {e}")))?;

    let num = |key: &str| -> Result<f64> {
        match table.get(key) {
            Some(toml::Value::Float(f)) => Ok(*f),
            Some(toml::Value::Integer(i)) => Ok(*i as f64),
            Some(other) => Err(Error::ParamFile(format!(
                "key {key:?} must be a number, got {}",
                other.type_str()
            ))),
            None => Err(Error::ParamFile(format!("missing key {key:?}"))),
        }
    };

    for key in table.keys() {
        let k = key.as_str();
        if !RAW_ONLY_KEYS.contains(&k)
            && !DERIVED_ONLY_KEYS.contains(&k)
            && !SHARED_KEYS.contains(&k)
        {
            return Err(Error::ParamFile(format!("unknown key {k:?}")));
        }
    }

    let has_raw = table.keys().any(|k| RAW_ONLY_KEYS.contains(&k.as_str()));
    let has_derived = table
        .keys()
        .any(|k| DERIVED_ONLY_KEYS.contains(&k.as_str()));
    if has_raw && has_derived {
        return Err(Error::ParamFile(
            "file mixes raw keys (K, xi_h, ...) with derived keys (K_hat, alpha, ...); \
             supply one form only"
                .into(),
        ));
    }

    if has_raw {
        let raw = ParamsRaw {
            r: num("r")?,
            k: num("K")?,
            xi_h: num("xi_h")?,
            xi_m: num("xi_m")?,
            rho: num("rho")?,
            d_h: num("d_h")?,
            d_m: num("d_m")?,
            mu_h: num("mu_h")?,
            mu_m: num("mu_m")?,
            alpha_hat: num("alpha_hat")?,
            c: num("c")?,
            beta_h: num("beta_h")?,
            beta_mh: num("beta_mh")?,
            beta_mh2: num("beta_mh2")?,
            beta_hm: num("beta_hm")?,
        };
        derive_params(&raw)
    } else {
        let p = Params {
            r: num("r")?,
            k_hat: num("K_hat")?,
            rho: num("rho")?,
            d_h: num("d_h")?,
            d_m: num("d_m")?,
            mu_h: num("mu_h")?,
            mu_m: num("mu_m")?,
            alpha: num("alpha")?,
            c: num("c")?,
            beta_h: num("beta_h")?,
            beta_mh_hat: num("beta_mh_hat")?,
            beta_mh_tilde: num("beta_mh_tilde")?,
            beta_hm_hat: num("beta_hm_hat")?,
        };
        p.validate()?;
        Ok(p)
    }
}

pub fn load_params(path: &Path) -> Result<Params> {
    let text = std::fs::read_to_string(path)?;
    params_from_toml_str(&text)
}
