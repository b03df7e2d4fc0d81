//! Machine-readable output records.

use serde::{Deserialize, Serialize};

use qcm_core::channel::AffineMap;
use qcm_core::design::{DesignCase, DesignResult};

/// One designed machine.
///
/// JSON fields: `case` (the design case, tagged by `variant`), `p`, `omega`
/// as `[α, α̃, β, β̃, γ, γ̃]`, `map_a` and `map_b` as
/// `{eta_x, eta_y, eta_z, delta_z}`, `f_a`, `f_b`, `objective`, `residual`,
/// `channel_id`, and `per_state` for two-state ensembles. Floats are written
/// as the shortest decimal that parses back to the same value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub case: DesignCase,
    pub p: f64,
    pub omega: [f64; 6],
    pub map_a: AffineMap,
    pub map_b: AffineMap,
    pub f_a: f64,
    pub f_b: f64,
    pub objective: f64,
    pub residual: f64,
    pub channel_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_state: Option<Vec<f64>>,
}

impl From<&DesignResult> for OutputRecord {
    fn from(r: &DesignResult) -> Self {
        Self {
            case: r.case.clone(),
            p: r.p,
            omega: r.omega.to_array(),
            map_a: r.map_a,
            map_b: r.map_b,
            f_a: r.f_a,
            f_b: r.f_b,
            objective: r.objective,
            residual: r.residual,
            channel_id: r.channel_id.to_string(),
            per_state: r.per_state.clone(),
        }
    }
}

pub const CSV_HEADER: &str = "p,f_a,f_b,residual";

impl OutputRecord {
    pub fn csv_row(&self) -> String {
        format!("{:?},{:?},{:?},{:?}", self.p, self.f_a, self.f_b, self.residual)
    }

    pub fn text(&self) -> String {
        let names = ["alpha", "alpha~", "beta", "beta~", "gamma", "gamma~"];
        let mut out = format!("case       {}\n", serde_json::to_string(&self.case).unwrap_or_default());
        out += &format!("p          {}\n", self.p);
        for (n, v) in names.iter().zip(self.omega) {
            out += &format!("{n:<10} {v}\n");
        }
        for (label, m) in [("A", &self.map_a), ("B", &self.map_b)] {
            out += &format!(
                "map {label}      eta = ({}, {}, {}), delta_z = {}\n",
                m.eta_x, m.eta_y, m.eta_z, m.delta_z
            );
        }
        out += &format!("F_A        {}\nF_B        {}\n", self.f_a, self.f_b);
        out += &format!("objective  {}\nresidual   {:e}\n", self.objective, self.residual);
        out += &format!("channel    {}\n", self.channel_id);
        if let Some(per) = &self.per_state {
            let list: Vec<String> = per.iter().map(f64::to_string).collect();
            out += &format!("per state  {}\n", list.join(", "));
        }
        out
    }
}
