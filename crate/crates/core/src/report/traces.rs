use crate::controller::loading_rates;
use crate::model::Network;
use crate::powerflow::PowerFlowSolution;

/// Time series recorded once per simulation step. Every series has the
/// same length as `time`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceSet {
    pub time: Vec<f64>,
    pub bus_ids: Vec<usize>,
    /// Per bus: voltage magnitude, pu (zero when de-energized).
    pub voltage: Vec<Vec<f64>>,
    /// Frequency deviation, Hz.
    pub df: Vec<f64>,
    pub load_buses: Vec<usize>,
    /// Per load: effective demand, MW.
    pub load_p: Vec<Vec<f64>>,
    pub line_ids: Vec<usize>,
    /// Per line: current over relay pickup.
    pub line_rate: Vec<Vec<f64>>,
}

impl TraceSet {
    pub fn new(network: &Network) -> Self {
        Self {
            time: Vec::new(),
            bus_ids: network.buses.iter().map(|b| b.id).collect(),
            voltage: vec![Vec::new(); network.n_bus()],
            df: Vec::new(),
            load_buses: network.loads.iter().map(|l| l.bus).collect(),
            load_p: vec![Vec::new(); network.loads.len()],
            line_ids: network.lines.iter().map(|l| l.id).collect(),
            line_rate: vec![Vec::new(); network.n_line()],
        }
    }

    pub fn push(&mut self, t: f64, network: &Network, solution: &PowerFlowSolution, df: f64) {
        self.time.push(t);
        for (series, &v) in self.voltage.iter_mut().zip(&solution.v_mag) {
            series.push(v);
        }
        self.df.push(df);
        for (series, &p) in self.load_p.iter_mut().zip(&solution.p_load) {
            series.push(p);
        }
        for (series, r) in self
            .line_rate
            .iter_mut()
            .zip(loading_rates(solution, network))
        {
            series.push(r);
        }
    }

    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    /// Named value columns (everything except time), in CSV order.
    pub fn columns(&self) -> Vec<(String, &[f64])> {
        let mut cols: Vec<(String, &[f64])> = Vec::new();
        for (id, s) in self.bus_ids.iter().zip(&self.voltage) {
            cols.push((format!("v_bus_{id}"), s));
        }
        cols.push(("df".to_string(), &self.df));
        for (bus, s) in self.load_buses.iter().zip(&self.load_p) {
            cols.push((format!("p_load_{bus}"), s));
        }
        for (id, s) in self.line_ids.iter().zip(&self.line_rate) {
            cols.push((format!("rate_line_{id}"), s));
        }
        cols
    }

    pub fn series(&self, name: &str) -> Option<&[f64]> {
        self.columns()
            .into_iter()
            .find(|(n, _)| n == name)
            .map(|(_, s)| s)
    }

    pub fn is_consistent(&self) -> bool {
        let n = self.time.len();
        self.columns().iter().all(|(_, s)| s.len() == n)
    }
}
