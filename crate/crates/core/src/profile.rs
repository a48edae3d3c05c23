//! Radial initial profiles `(rho0, m0)`: closed-form presets and sampled tables.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smooth compactly supported bump with `phi(0) = 1`, supported in `|x| < 1`.
pub fn bump(x: f64) -> f64 {
    let s = 1.0 - x * x;
    if s <= 0.0 {
        0.0
    } else {
        (1.0 - 1.0 / s).exp()
    }
}

/// Profile description as it appears in a run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSpec {
    /// `(rho_bar, 0)`.
    Rest,
    /// `rho = rho_bar (1 + amplitude phi((r - center)/width))`,
    /// `m = momentum phi((r - center)/width)`.
    Bump {
        amplitude: f64,
        center: f64,
        width: f64,
        #[serde(default)]
        momentum: f64,
    },
    /// `rho = rho_bar (1 + amplitude exp(-((r - center)/width)^2))`, at rest.
    Gaussian {
        amplitude: f64,
        center: f64,
        width: f64,
    },
    /// `rho = rho_bar`, `m = amplitude phi((r - center)/width)`.
    Pulse {
        amplitude: f64,
        center: f64,
        width: f64,
    },
    /// Piecewise-constant states separated at `interface`.
    Riemann {
        interface: f64,
        rho_left: f64,
        rho_right: f64,
        #[serde(default)]
        u_left: f64,
        #[serde(default)]
        u_right: f64,
    },
    /// Table with columns `r, rho0, m0`.
    Csv { path: PathBuf },
}

/// Evaluable profile.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Analytic { spec: ProfileSpec, rho_bar: f64 },
    Sampled(SampledProfile),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledProfile {
    pub r: Vec<f64>,
    pub rho: Vec<f64>,
    pub m: Vec<f64>,
}

impl SampledProfile {
    pub fn new(r: Vec<f64>, rho: Vec<f64>, m: Vec<f64>) -> Result<Self> {
        if r.len() < 2 || rho.len() != r.len() || m.len() != r.len() {
            return Err(Error::InputContract(format!(
                "sampled profile needs >= 2 rows of equal length, got r: {}, rho0: {}, m0: {}",
                r.len(),
                rho.len(),
                m.len()
            )));
        }
        for i in 0..r.len() {
            let line = i + 2;
            if !(r[i].is_finite() && rho[i].is_finite() && m[i].is_finite()) {
                return Err(Error::Parse {
                    row: line,
                    message: "non-finite value".into(),
                });
            }
            if r[i] < 0.0 || rho[i] < 0.0 {
                return Err(Error::Parse {
                    row: line,
                    message: format!("negative r or rho0 ({}, {})", r[i], rho[i]),
                });
            }
            if rho[i] == 0.0 && m[i] != 0.0 {
                return Err(Error::Parse {
                    row: line,
                    message: format!("momentum {} on vacuum", m[i]),
                });
            }
            if i > 0 && r[i] <= r[i - 1] {
                return Err(Error::Parse {
                    row: line,
                    message: format!("r = {} does not increase (previous {})", r[i], r[i - 1]),
                });
            }
        }
        Ok(Self { r, rho, m })
    }

    /// Reads a CSV with a header naming `r`, `rho0` and `m0`. Row numbers in errors are
    /// file line numbers (header is line 1).
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
        let headers = rdr.headers()?.clone();
        let col = |name: &str| {
            headers.iter().position(|h| h == name).ok_or_else(|| Error::Parse {
                row: 1,
                message: format!("missing column `{name}`"),
            })
        };
        let (ir, irho, im) = (col("r")?, col("rho0")?, col("m0")?);
        let (mut r, mut rho, mut m) = (Vec::new(), Vec::new(), Vec::new());
        for (k, rec) in rdr.records().enumerate() {
            let line = k + 2;
            let rec = rec?;
            let get = |i: usize| -> Result<f64> {
                let s = rec.get(i).unwrap_or("");
                s.parse::<f64>().map_err(|_| Error::Parse {
                    row: line,
                    message: format!("cannot parse `{s}` as a number"),
                })
            };
            r.push(get(ir)?);
            rho.push(get(irho)?);
            m.push(get(im)?);
        }
        Self::new(r, rho, m)
    }

    fn interp(&self, values: &[f64], x: f64) -> f64 {
        let n = self.r.len();
        if x <= self.r[0] {
            return values[0];
        }
        if x >= self.r[n - 1] {
            return values[n - 1];
        }
        let k = self.r.partition_point(|&ri| ri <= x) - 1;
        let w = (x - self.r[k]) / (self.r[k + 1] - self.r[k]);
        values[k] + w * (values[k + 1] - values[k])
    }
}

impl ProfileSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = |field: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::config(format!("initdata.profile.{field}"), format!("need > 0, got {v}")))
            }
        };
        match *self {
            ProfileSpec::Bump {
                amplitude, width, ..
            }
            | ProfileSpec::Gaussian {
                amplitude, width, ..
            } => {
                positive("width", width)?;
                if !(amplitude > -1.0) {
                    return Err(Error::config(
                        "initdata.profile.amplitude",
                        format!("density would turn negative for amplitude {amplitude}"),
                    ));
                }
                Ok(())
            }
            ProfileSpec::Pulse { width, .. } => positive("width", width),
            ProfileSpec::Riemann {
                rho_left,
                rho_right,
                u_left,
                u_right,
                interface,
            } => {
                positive("interface", interface)?;
                if rho_left < 0.0 || rho_right < 0.0 {
                    return Err(Error::config("initdata.profile.rho", "negative density"));
                }
                if (rho_left == 0.0 && u_left != 0.0) || (rho_right == 0.0 && u_right != 0.0) {
                    return Err(Error::config(
                        "initdata.profile.u",
                        "vacuum states must carry zero velocity",
                    ));
                }
                Ok(())
            }
            ProfileSpec::Rest | ProfileSpec::Csv { .. } => Ok(()),
        }
    }
}

impl Profile {
    /// Resolves the description (reading the table for `Csv`) against the far-field density.
    pub fn from_spec(spec: &ProfileSpec, rho_bar: f64) -> Result<Self> {
        spec.validate()?;
        match spec {
            ProfileSpec::Csv { path } => Ok(Profile::Sampled(SampledProfile::from_csv(path)?)),
            other => Ok(Profile::Analytic {
                spec: other.clone(),
                rho_bar,
            }),
        }
    }

    pub fn rho0(&self, r: f64) -> f64 {
        match self {
            Profile::Sampled(s) => s.interp(&s.rho, r),
            Profile::Analytic { spec, rho_bar } => match *spec {
                ProfileSpec::Rest | ProfileSpec::Pulse { .. } => *rho_bar,
                ProfileSpec::Bump {
                    amplitude,
                    center,
                    width,
                    ..
                } => rho_bar * (1.0 + amplitude * bump((r - center) / width)),
                ProfileSpec::Gaussian {
                    amplitude,
                    center,
                    width,
                } => rho_bar * (1.0 + amplitude * (-((r - center) / width).powi(2)).exp()),
                ProfileSpec::Riemann {
                    interface,
                    rho_left,
                    rho_right,
                    ..
                } => {
                    if r < interface {
                        rho_left
                    } else {
                        rho_right
                    }
                }
                ProfileSpec::Csv { .. } => unreachable!("tables resolve to Sampled"),
            },
        }
    }

    pub fn m0(&self, r: f64) -> f64 {
        match self {
            Profile::Sampled(s) => {
                if s.interp(&s.rho, r) == 0.0 {
                    0.0
                } else {
                    s.interp(&s.m, r)
                }
            }
            Profile::Analytic { spec, .. } => match *spec {
                ProfileSpec::Rest | ProfileSpec::Gaussian { .. } => 0.0,
                ProfileSpec::Bump {
                    momentum,
                    center,
                    width,
                    ..
                } => momentum * bump((r - center) / width),
                ProfileSpec::Pulse {
                    amplitude,
                    center,
                    width,
                } => amplitude * bump((r - center) / width),
                ProfileSpec::Riemann {
                    interface,
                    rho_left,
                    rho_right,
                    u_left,
                    u_right,
                } => {
                    if r < interface {
                        rho_left * u_left
                    } else {
                        rho_right * u_right
                    }
                }
                ProfileSpec::Csv { .. } => unreachable!("tables resolve to Sampled"),
            },
        }
    }

    /// Radius beyond which the profile is (numerically) the far-field state.
    pub fn far_field_radius(&self) -> f64 {
        match self {
            Profile::Sampled(s) => *s.r.last().unwrap_or(&0.0),
            Profile::Analytic { spec, .. } => match *spec {
                ProfileSpec::Rest => 0.0,
                ProfileSpec::Bump { center, width, .. } | ProfileSpec::Pulse { center, width, .. } => {
                    center + width
                }
                ProfileSpec::Gaussian { center, width, .. } => center + 6.0 * width,
                ProfileSpec::Riemann { interface, .. } => interface,
                ProfileSpec::Csv { .. } => 0.0,
            },
        }
    }
}
