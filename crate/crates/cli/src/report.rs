//! Deterministic run report serialization: sorted keys, fixed float
//! formatting, byte-identical across runs with identical inputs and seeds.

use delay_h2::statespace::StateSpace;
use delay_h2::{FirTransfer, InformationPattern, Matrix, Plant};

/// Fixed %.12e-style float rendering (sign, 12 fractional digits, signed
/// two-digit exponent); still a valid JSON number.
pub fn fmt_float(x: f64) -> String {
    let raw = format!("{x:.12e}");
    let (mantissa, exponent) = raw.split_once('e').expect("exponent marker present");
    let e: i32 = exponent.parse().expect("numeric exponent");
    let sign = if e < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", e.abs())
}

fn fmt_usize_list(values: &[usize]) -> String {
    let inner: Vec<String> = values.iter().map(|v| v.to_string()).collect();
    format!("[{}]", inner.join(","))
}

fn fmt_matrix(m: &Matrix) -> String {
    let rows: Vec<String> = (0..m.nrows())
        .map(|r| {
            let cells: Vec<String> = (0..m.ncols()).map(|c| fmt_float(m[(r, c)])).collect();
            format!("[{}]", cells.join(","))
        })
        .collect();
    format!("[{}]", rows.join(","))
}

/// Oracle outcome attached to a report.
pub struct OracleReport {
    pub norm: f64,
    pub fir_length: usize,
    pub cost_horizon: usize,
}

/// Optional controller payload (written with --emit-controller).
pub struct ControllerReport {
    pub q_star: StateSpace,
    pub v_star: FirTransfer,
}

/// Everything `synthesize` reports for one run.
pub struct RunReport {
    pub plant_n: usize,
    pub plant_m1: usize,
    pub plant_p2: usize,
    pub plant_q1: usize,
    pub plant_q2: usize,
    pub spectral_radius: f64,
    pub pattern_n: usize,
    pub u_blocks: Vec<usize>,
    pub y_blocks: Vec<usize>,
    pub free_entries: usize,
    pub quadratically_invariant: bool,
    pub norm_centralized: f64,
    pub norm_delayed: f64,
    pub norm_decentralized: f64,
    pub oracle: Option<OracleReport>,
    pub decomposition_value: f64,
    pub stationarity_residual: f64,
    pub seed: u64,
    pub controller: Option<ControllerReport>,
}

impl RunReport {
    pub fn summarize_pattern(pattern: &InformationPattern) -> (Vec<usize>, Vec<usize>, usize) {
        (
            pattern.u_blocks().sizes().to_vec(),
            pattern.y_blocks().sizes().to_vec(),
            pattern.free_entries().len(),
        )
    }

    pub fn plant_digest(plant: &Plant) -> (usize, usize, usize, usize, usize, f64) {
        (plant.n(), plant.m1(), plant.p2(), plant.q1(), plant.q2(), plant.radius())
    }

    /// Render as JSON with alphabetically sorted keys at every level.
    pub fn to_json(&self) -> String {
        let mut out = String::from("{\n");
        if let Some(controller) = &self.controller {
            out.push_str("  \"controller\": {\n");
            out.push_str(&format!(
                "    \"q_star\": {{\"a\": {}, \"b\": {}, \"c\": {}, \"d\": {}}},\n",
                fmt_matrix(controller.q_star.a()),
                fmt_matrix(controller.q_star.b()),
                fmt_matrix(controller.q_star.c()),
                fmt_matrix(controller.q_star.d())
            ));
            let lags: Vec<String> =
                controller.v_star.coefficients().iter().map(fmt_matrix).collect();
            out.push_str(&format!("    \"v_star\": [{}]\n", lags.join(",")));
            out.push_str("  },\n");
        }
        out.push_str(&format!(
            "  \"decomposition_value\": {},\n",
            fmt_float(self.decomposition_value)
        ));
        out.push_str("  \"norms\": {\n");
        out.push_str(&format!(
            "    \"centralized\": {},\n",
            fmt_float(self.norm_centralized)
        ));
        out.push_str(&format!(
            "    \"decentralized\": {},\n",
            fmt_float(self.norm_decentralized)
        ));
        out.push_str(&format!("    \"delayed\": {},\n", fmt_float(self.norm_delayed)));
        match &self.oracle {
            Some(oracle) => out.push_str(&format!(
                "    \"oracle\": {{\"cost_horizon\": {}, \"fir_length\": {}, \"norm\": {}}}\n",
                oracle.cost_horizon,
                oracle.fir_length,
                fmt_float(oracle.norm)
            )),
            None => out.push_str("    \"oracle\": null\n"),
        }
        out.push_str("  },\n");
        out.push_str("  \"pattern\": {\n");
        out.push_str(&format!("    \"free_entries\": {},\n", self.free_entries));
        out.push_str(&format!("    \"n\": {},\n", self.pattern_n));
        out.push_str(&format!(
            "    \"quadratically_invariant\": {},\n",
            self.quadratically_invariant
        ));
        out.push_str(&format!("    \"u_blocks\": {},\n", fmt_usize_list(&self.u_blocks)));
        out.push_str(&format!("    \"y_blocks\": {}\n", fmt_usize_list(&self.y_blocks)));
        out.push_str("  },\n");
        out.push_str("  \"plant\": {\n");
        out.push_str(&format!(
            "    \"dimensions\": {{\"m1\": {}, \"n\": {}, \"p2\": {}, \"q1\": {}, \"q2\": {}}},\n",
            self.plant_m1, self.plant_n, self.plant_p2, self.plant_q1, self.plant_q2
        ));
        out.push_str(&format!(
            "    \"spectral_radius\": {}\n",
            fmt_float(self.spectral_radius)
        ));
        out.push_str("  },\n");
        out.push_str(&format!("  \"seed\": {},\n", self.seed));
        out.push_str(&format!(
            "  \"stationarity_residual\": {}\n",
            fmt_float(self.stationarity_residual)
        ));
        out.push('}');
        out.push('\n');
        out
    }
}
