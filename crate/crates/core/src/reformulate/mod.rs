//! LP-format export of the nominal integer program and of its compact robust
//! counterpart.
//!
//! The robust model dualizes the inner deviation problem of every capacity
//! row `(e, t)`. For each band `k` emitted there is a free price `w_e_t_k`,
//! and for each candidate pair `(c, p)` with `e ∈ p` a price `z_e_c_p_t ≥ 0`:
//!
//! ```text
//! cap_e_t:          φ Σ_{τ≤t} y_e_τ − Σ d̄ x − Σ_k θ_k w_k − Σ z ≥ 0
//! dual_e_c_p_t_k:   w_k + z_e_c_p_t − δ[c][t][k] x_c_p_t ≥ 0
//! ```
//!
//! The θ of each row are fixed before routing is known, from the number of
//! candidate pairs crossing the edge. This over-counts the coefficients of a
//! concrete routing, so the model is at least as conservative as evaluating
//! that routing directly.

mod lp;

use std::collections::HashMap;
use std::fmt::Write as _;

pub use lp::{LpModel, Row, Sense};

use crate::evaluate::{install_for_loads, solve_transport, RoutingState};
use crate::instance::Instance;
use crate::uncertainty::MultibandSet;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ModelStats {
    pub x_vars: usize,
    pub y_vars: usize,
    pub w_vars: usize,
    pub z_vars: usize,
    pub assign_rows: usize,
    pub cap_rows: usize,
    pub dual_rows: usize,
    /// Deviation bands carrying dual rows.
    pub bands: usize,
}

impl ModelStats {
    /// Counts predicted from the instance alone. `bands` is 0 for the
    /// nominal model.
    pub fn closed_form(instance: &Instance, bands: Option<usize>) -> ModelStats {
        let t = instance.periods;
        let x: usize = instance.paths.iter().map(Vec::len).sum::<usize>() * t;
        let mut s = ModelStats {
            x_vars: x,
            y_vars: instance.num_edges() * t,
            assign_rows: instance.num_commodities() * t,
            cap_rows: instance.num_edges() * t,
            ..Default::default()
        };
        if let Some(k) = bands {
            let crossings: usize = crossing_pairs(instance).iter().map(Vec::len).sum();
            s.bands = k;
            s.w_vars = instance.num_edges() * t * k;
            s.z_vars = crossings * t;
            s.dual_rows = s.z_vars * k;
        }
        s
    }

    pub fn total_vars(&self) -> usize {
        self.x_vars + self.y_vars + self.w_vars + self.z_vars
    }

    pub fn total_rows(&self) -> usize {
        self.assign_rows + self.cap_rows + self.dual_rows
    }

    /// Recounts families by name prefix in a parsed model.
    pub fn recount(model: &LpModel) -> ModelStats {
        let mut s = ModelStats::default();
        for v in model.variables() {
            match v.split('_').next() {
                Some("x") => s.x_vars += 1,
                Some("y") => s.y_vars += 1,
                Some("w") => s.w_vars += 1,
                Some("z") => s.z_vars += 1,
                _ => {}
            }
        }
        for r in &model.rows {
            match r.name.split('_').next() {
                Some("assign") => s.assign_rows += 1,
                Some("cap") => s.cap_rows += 1,
                Some("dual") => s.dual_rows += 1,
                _ => {}
            }
        }
        let mut ks: Vec<&str> = model
            .rows
            .iter()
            .filter(|r| r.name.starts_with("dual_"))
            .filter_map(|r| r.name.rsplit('_').next())
            .collect();
        ks.sort_unstable();
        ks.dedup();
        s.bands = ks.len();
        s
    }
}

/// Candidate `(c, p)` pairs whose path uses each edge.
pub fn crossing_pairs(instance: &Instance) -> Vec<Vec<(usize, usize)>> {
    let mut out = vec![Vec::new(); instance.num_edges()];
    for (c, paths) in instance.paths.iter().enumerate() {
        for (p, path) in paths.iter().enumerate() {
            for &e in path {
                out[e].push((c, p));
            }
        }
    }
    out
}

pub fn x_name(c: usize, p: usize, t: usize) -> String {
    format!("x_c{}_p{}_t{}", c + 1, p + 1, t + 1)
}

pub fn y_name(e: usize, t: usize) -> String {
    format!("y_e{}_t{}", e + 1, t + 1)
}

fn band_label(k: isize) -> String {
    if k < 0 {
        format!("km{}", -k)
    } else {
        format!("k{k}")
    }
}

pub fn w_name(e: usize, t: usize, k: isize) -> String {
    format!("w_e{}_t{}_{}", e + 1, t + 1, band_label(k))
}

pub fn z_name(e: usize, c: usize, p: usize, t: usize) -> String {
    format!("z_e{}_c{}_p{}_t{}", e + 1, c + 1, p + 1, t + 1)
}

fn num(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x:?}")
    }
}

/// Builds one statement, wrapping long term lists.
struct Stmt {
    text: String,
    width: usize,
}

impl Stmt {
    fn new(name: &str) -> Stmt {
        let text = format!(" {name}:");
        Stmt { width: text.len(), text }
    }

    fn term(&mut self, coef: f64, var: &str) {
        if coef != 0.0 {
            self.push(coef, var);
        }
    }

    fn push(&mut self, coef: f64, var: &str) {
        let piece = match (coef < 0.0, coef.abs() == 1.0) {
            (false, true) => format!(" + {var}"),
            (true, true) => format!(" - {var}"),
            (false, false) => format!(" + {} {var}", num(coef)),
            (true, false) => format!(" - {} {var}", num(-coef)),
        };
        if self.width + piece.len() > 100 {
            self.text.push_str("\n  ");
            self.width = 2;
        }
        self.width += piece.len();
        self.text.push_str(&piece);
    }

    fn finish(mut self, tail: &str) -> String {
        self.text.push_str(tail);
        self.text.push('\n');
        self.text
    }
}

/// Band positions that get dual rows.
fn emitted_bands(mb: &MultibandSet, all_bands: bool) -> Vec<usize> {
    let include_negative = all_bands || mb.rule.forces_negative();
    (0..mb.num_bands())
        .filter(|&pos| pos != mb.zero() && (include_negative || pos > mb.zero()))
        .collect()
}

fn emit(instance: &Instance, robust: Option<(&MultibandSet, bool)>) -> (String, ModelStats) {
    let phi = instance.module_size;
    let nt = instance.periods;
    let pairs = crossing_pairs(instance);
    let mut out = String::new();
    let mut stats = ModelStats::closed_form(instance, None);
    let _ = writeln!(out, "\\ {}", instance.name);

    out.push_str("Minimize\n");
    let mut obj = Stmt::new("cost");
    for e in 0..instance.num_edges() {
        for t in 0..nt {
            obj.push(instance.cost[e][t], &y_name(e, t));
        }
    }
    out.push_str(&obj.finish(""));

    out.push_str("Subject To\n");
    for c in 0..instance.num_commodities() {
        for t in 0..nt {
            let mut s = Stmt::new(&format!("assign_c{}_t{}", c + 1, t + 1));
            for p in 0..instance.paths[c].len() {
                s.term(1.0, &x_name(c, p, t));
            }
            out.push_str(&s.finish(" = 1"));
        }
    }
    let bands = robust.map(|(mb, all)| emitted_bands(mb, all)).unwrap_or_default();
    for e in 0..instance.num_edges() {
        let theta = robust.map(|(mb, _)| mb.profile(pairs[e].len()));
        for t in 0..nt {
            let mut s = Stmt::new(&format!("cap_e{}_t{}", e + 1, t + 1));
            for tau in 0..=t {
                s.term(phi, &y_name(e, tau));
            }
            for &(c, p) in &pairs[e] {
                s.term(-instance.demand[c][t], &x_name(c, p, t));
            }
            if let (Some((mb, _)), Some(theta)) = (robust, &theta) {
                for &pos in &bands {
                    s.term(-(theta.theta[pos] as f64), &w_name(e, t, mb.bands.index(pos)));
                }
                for &(c, p) in &pairs[e] {
                    s.term(-1.0, &z_name(e, c, p, t));
                }
            }
            out.push_str(&s.finish(" >= 0"));
        }
    }
    if let Some((mb, _)) = robust {
        for e in 0..instance.num_edges() {
            for t in 0..nt {
                for &(c, p) in &pairs[e] {
                    for &pos in &bands {
                        let k = mb.bands.index(pos);
                        let mut s = Stmt::new(&format!(
                            "dual_e{}_c{}_p{}_t{}_{}",
                            e + 1,
                            c + 1,
                            p + 1,
                            t + 1,
                            band_label(k)
                        ));
                        s.term(1.0, &w_name(e, t, k));
                        s.term(1.0, &z_name(e, c, p, t));
                        s.term(-mb.delta(c, t)[pos], &x_name(c, p, t));
                        out.push_str(&s.finish(" >= 0"));
                    }
                }
            }
        }
        if !bands.is_empty() {
            out.push_str("Bounds\n");
            for e in 0..instance.num_edges() {
                for t in 0..nt {
                    for &pos in &bands {
                        let _ = writeln!(out, " {} free", w_name(e, t, mb.bands.index(pos)));
                    }
                }
            }
        }
        stats = ModelStats::closed_form(instance, Some(bands.len()));
    }

    out.push_str("Generals\n");
    for e in 0..instance.num_edges() {
        let names: Vec<String> = (0..nt).map(|t| y_name(e, t)).collect();
        let _ = writeln!(out, " {}", names.join(" "));
    }
    out.push_str("Binaries\n");
    for (c, paths) in instance.paths.iter().enumerate() {
        for p in 0..paths.len() {
            let names: Vec<String> = (0..nt).map(|t| x_name(c, p, t)).collect();
            let _ = writeln!(out, " {}", names.join(" "));
        }
    }
    out.push_str("End\n");
    (out, stats)
}

/// The nominal integer program.
pub fn emit_nominal(instance: &Instance) -> (String, ModelStats) {
    emit(instance, None)
}

/// The compact robust counterpart. Dual rows cover the positive bands, or
/// every nonzero band when `all_bands` is set or negative deviations are
/// forced.
pub fn emit_robust(instance: &Instance, mb: &MultibandSet, all_bands: bool) -> (String, ModelStats) {
    emit(instance, Some((mb, all_bands)))
}

/// Values of every robust-model variable for a complete routing: `x` from the
/// routing, `w` and `z` from optimal deviation duals at the a-priori θ, and
/// `y` the cheapest installation covering the resulting loads. Returns the
/// values and their objective.
pub fn robust_assignment(
    instance: &Instance,
    mb: &MultibandSet,
    routing: &RoutingState,
    all_bands: bool,
) -> (HashMap<String, f64>, f64) {
    let pairs = crossing_pairs(instance);
    let bands = emitted_bands(mb, all_bands);
    let mut vals = HashMap::new();
    for c in 0..instance.num_commodities() {
        for t in 0..instance.periods {
            let chosen = routing.get(c, t).expect("routing must be complete");
            for p in 0..instance.paths[c].len() {
                vals.insert(x_name(c, p, t), if p == chosen { 1.0 } else { 0.0 });
            }
        }
    }
    let zeros = vec![0.0; mb.num_bands()];
    let mut loads = vec![vec![0.0; instance.periods]; instance.num_edges()];
    for e in 0..instance.num_edges() {
        let profile = mb.profile(pairs[e].len());
        for t in 0..instance.periods {
            let on: Vec<bool> = pairs[e].iter().map(|&(c, p)| routing.get(c, t) == Some(p)).collect();
            let values: Vec<&[f64]> = pairs[e]
                .iter()
                .zip(&on)
                .map(|(&(c, _), &x)| if x { mb.delta(c, t) } else { zeros.as_slice() })
                .collect();
            let tr = solve_transport(&values, &profile.theta, mb.zero());
            for &pos in &bands {
                vals.insert(w_name(e, t, mb.bands.index(pos)), tr.w[pos]);
            }
            for (j, &(c, p)) in pairs[e].iter().enumerate() {
                vals.insert(z_name(e, c, p, t), tr.z[j]);
            }
            let nominal: f64 = pairs[e]
                .iter()
                .zip(&on)
                .filter(|(_, &x)| x)
                .map(|(&(c, _), _)| instance.demand[c][t])
                .sum();
            loads[e][t] = (nominal + tr.value).max(0.0);
        }
    }
    let (installs, cost) = install_for_loads(instance, &loads);
    for (e, row) in installs.iter().enumerate() {
        for (t, &y) in row.iter().enumerate() {
            vals.insert(y_name(e, t), y as f64);
        }
    }
    (vals, cost)
}
