use qincompat::sdp::{Status, Verdict};
use qincompat::{Method, Tolerances};
use serde::Serialize;
use serde_json::Value;
use std::collections::BTreeMap;

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ConfigSnapshot {
    pub feas: f64,
    pub infeas: f64,
    pub max_iter: usize,
    pub bisect: f64,
    pub method: String,
}

impl From<&Tolerances> for ConfigSnapshot {
    fn from(t: &Tolerances) -> Self {
        Self {
            feas: t.feas,
            infeas: t.infeas,
            max_iter: t.max_iter,
            bisect: t.bisect,
            method: match t.method {
                Method::DouglasRachford => "douglas-rachford".into(),
                Method::AlternatingProjections => "alternating-projections".into(),
            },
        }
    }
}

impl ConfigSnapshot {
    /// One-line form for CSV headers.
    pub fn header_line(&self) -> String {
        format!(
            "# solver: method={} feas={:e} infeas={:e} max_iter={} bisect={:e}",
            self.method, self.feas, self.infeas, self.max_iter, self.bisect
        )
    }
}

/// Machine-readable outcome of one command.
#[derive(Clone, Debug, Serialize)]
pub struct ResultRecord {
    pub command: String,
    pub inputs: Vec<String>,
    pub status: Option<String>,
    pub value: Option<f64>,
    pub residual: Option<f64>,
    pub iterations: Option<usize>,
    pub wall_time_s: f64,
    pub config: ConfigSnapshot,
    pub details: BTreeMap<String, Value>,
}

impl ResultRecord {
    pub fn new(command: &str, inputs: Vec<String>, tol: &Tolerances) -> Self {
        Self {
            command: command.into(),
            inputs,
            status: None,
            value: None,
            residual: None,
            iterations: None,
            wall_time_s: 0.0,
            config: tol.into(),
            details: BTreeMap::new(),
        }
    }

    pub fn with_verdict(mut self, v: &Verdict) -> Self {
        self.status = Some(v.status.label().into());
        self.residual = Some(v.residual);
        self.iterations = Some(v.iterations);
        self
    }

    pub fn with_status(mut self, s: Status) -> Self {
        self.status = Some(s.label().into());
        self
    }

    pub fn detail(mut self, key: &str, v: impl Into<Value>) -> Self {
        self.details.insert(key.into(), v.into());
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    /// Single-row CSV with a fixed column order.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["command", "inputs", "status", "value", "residual", "iterations", "wall_time_s"])
            .expect("in-memory");
        let opt = |v: Option<String>| v.unwrap_or_default();
        w.write_record([
            self.command.clone(),
            self.inputs.join(";"),
            opt(self.status.clone()),
            opt(self.value.map(|v| v.to_string())),
            opt(self.residual.map(|v| format!("{v:e}"))),
            opt(self.iterations.map(|v| v.to_string())),
            format!("{:.3}", self.wall_time_s),
        ])
        .expect("in-memory");
        String::from_utf8(w.into_inner().expect("in-memory")).expect("utf8")
    }
}
