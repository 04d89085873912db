//! JSON device files: complex entries as `[re, im]`, matrices row-major.

use qincompat::devices::{Channel, Observable, State};
use qincompat::num::cx;
use qincompat::process::Tester;
use qincompat::steering::Assemblage;
use qincompat::{Hermitian, Matrix};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;

pub type MatrixJson = Vec<Vec<[f64; 2]>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DeviceFile {
    State {
        dim: usize,
        rho: MatrixJson,
    },
    Observable {
        dim: usize,
        outcomes: Vec<String>,
        effects: Vec<MatrixJson>,
    },
    Channel {
        in_dim: usize,
        out_dim: usize,
        kraus: Vec<MatrixJson>,
    },
    Tester {
        in_dim: usize,
        out_dim: usize,
        effects: Vec<MatrixJson>,
    },
    Assemblage {
        dim: usize,
        sigma: Vec<Vec<MatrixJson>>,
    },
}

#[derive(Clone, Debug)]
pub enum Device {
    State(State),
    Observable(Observable),
    Channel(Channel),
    Tester(Tester),
    Assemblage(Assemblage),
}

impl Device {
    pub fn kind(&self) -> &'static str {
        match self {
            Device::State(_) => "state",
            Device::Observable(_) => "observable",
            Device::Channel(_) => "channel",
            Device::Tester(_) => "tester",
            Device::Assemblage(_) => "assemblage",
        }
    }
}

/// Malformed device file: location inside the document and the reason.
#[derive(Clone, Debug, PartialEq)]
pub struct ParseError {
    pub path: String,
    pub reason: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.reason)
    }
}

impl std::error::Error for ParseError {}

fn err(path: impl Into<String>, reason: impl fmt::Display) -> ParseError {
    ParseError {
        path: path.into(),
        reason: reason.to_string(),
    }
}

fn to_matrix(path: &str, m: &MatrixJson, rows: usize, cols: usize) -> Result<Matrix, ParseError> {
    if m.len() != rows {
        return Err(err(path, format!("expected {rows} rows, found {}", m.len())));
    }
    let mut data = Vec::with_capacity(rows * cols);
    for (r, row) in m.iter().enumerate() {
        if row.len() != cols {
            return Err(err(format!("{path}[{r}]"), format!("expected {cols} columns, found {}", row.len())));
        }
        data.extend(row.iter().map(|&[re, im]| cx(re, im)));
    }
    Matrix::new(rows, cols, data).map_err(|e| err(path, e))
}

fn to_hermitian(path: &str, m: &MatrixJson, dim: usize) -> Result<Hermitian, ParseError> {
    Hermitian::new(to_matrix(path, m, dim, dim)?).map_err(|e| err(path, e))
}

fn from_matrix(m: &Matrix) -> MatrixJson {
    (0..m.rows())
        .map(|r| (0..m.cols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect()
}

fn from_hermitian(h: &Hermitian) -> MatrixJson {
    from_matrix(h.as_matrix())
}

fn hermitians(path: &str, list: &[MatrixJson], dim: usize) -> Result<Vec<Hermitian>, ParseError> {
    list.iter()
        .enumerate()
        .map(|(k, m)| to_hermitian(&format!("{path}[{k}]"), m, dim))
        .collect()
}

impl DeviceFile {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        serde_json::from_str(text).map_err(|e| {
            let at = if e.line() == 0 {
                "document".to_string()
            } else {
                format!("line {} column {}", e.line(), e.column())
            };
            err(at, e)
        })
    }

    pub fn read(path: &Path) -> Result<Self, ParseError> {
        let text = std::fs::read_to_string(path).map_err(|e| err(path.display().to_string(), e))?;
        Self::parse(&text).map_err(|e| err(format!("{}: {}", path.display(), e.path), e.reason))
    }

    /// Pretty JSON with fixed key order and shortest round-trip floats.
    pub fn to_canonical_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    pub fn into_device(self) -> Result<Device, ParseError> {
        match self {
            DeviceFile::State { dim, rho } => {
                let h = to_hermitian("rho", &rho, dim)?;
                State::new(h).map(Device::State).map_err(|e| err("rho", e))
            }
            DeviceFile::Observable { dim, outcomes, effects } => {
                let effects = hermitians("effects", &effects, dim)?;
                Observable::with_labels(effects, outcomes)
                    .map(Device::Observable)
                    .map_err(|e| err("effects", e))
            }
            DeviceFile::Channel { in_dim, out_dim, kraus } => {
                let kraus = kraus
                    .iter()
                    .enumerate()
                    .map(|(k, m)| to_matrix(&format!("kraus[{k}]"), m, out_dim, in_dim))
                    .collect::<Result<Vec<_>, _>>()?;
                if kraus.is_empty() {
                    return Err(err("kraus", "empty Kraus list"));
                }
                Channel::from_kraus(kraus).map(Device::Channel).map_err(|e| err("kraus", e))
            }
            DeviceFile::Tester { in_dim, out_dim, effects } => {
                let effects = hermitians("effects", &effects, in_dim * out_dim)?;
                Tester::new(effects, in_dim, out_dim).map(Device::Tester).map_err(|e| err("effects", e))
            }
            DeviceFile::Assemblage { dim, sigma } => {
                let sigma = sigma
                    .iter()
                    .enumerate()
                    .map(|(j, row)| hermitians(&format!("sigma[{j}]"), row, dim))
                    .collect::<Result<Vec<_>, _>>()?;
                Assemblage::new(sigma).map(Device::Assemblage).map_err(|e| err("sigma", e))
            }
        }
    }

    pub fn from_device(d: &Device) -> Self {
        match d {
            Device::State(s) => DeviceFile::State {
                dim: s.dim(),
                rho: from_hermitian(s.rho()),
            },
            Device::Observable(m) => DeviceFile::Observable {
                dim: m.dim(),
                outcomes: m.outcomes().to_vec(),
                effects: m.effects().iter().map(from_hermitian).collect(),
            },
            Device::Channel(c) => DeviceFile::Channel {
                in_dim: c.in_dim(),
                out_dim: c.out_dim(),
                kraus: c.kraus().iter().map(from_matrix).collect(),
            },
            Device::Tester(t) => DeviceFile::Tester {
                in_dim: t.in_dim(),
                out_dim: t.out_dim(),
                effects: t.effects().iter().map(from_hermitian).collect(),
            },
            Device::Assemblage(a) => DeviceFile::Assemblage {
                dim: a.dim(),
                sigma: (0..a.num_settings())
                    .map(|j| (0..a.outcomes()[j]).map(|x| from_hermitian(a.sigma(j, x))).collect())
                    .collect(),
            },
        }
    }
}

/// Reads and validates a device file.
pub fn load(path: &Path) -> Result<Device, ParseError> {
    DeviceFile::read(path)?
        .into_device()
        .map_err(|e| err(format!("{}: {}", path.display(), e.path), e.reason))
}

#[cfg(test)]
mod tests {
    use super::*;
    use qincompat::devices::mub_qubit;

    #[test]
    fn observable_round_trip_is_canonical() {
        let (x, _, _) = mub_qubit();
        let text = DeviceFile::from_device(&Device::Observable(x)).to_canonical_string();
        let again = DeviceFile::parse(&text).unwrap().into_device().unwrap();
        assert_eq!(DeviceFile::from_device(&again).to_canonical_string(), text);
    }

    #[test]
    fn wrong_shape_reports_path() {
        let text = r#"{"kind":"observable","dim":2,"outcomes":["0"],"effects":[[[[1,0]]]]}"#;
        let e = DeviceFile::parse(text).unwrap().into_device().unwrap_err();
        assert_eq!(e.path, "effects[0]");
    }

    #[test]
    fn unknown_kind_rejected() {
        assert!(DeviceFile::parse(r#"{"kind":"comb","dim":2}"#).is_err());
    }
}
