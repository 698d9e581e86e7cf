//! The analyze report: structural, equilibrium, local and global blocks,
//! rendered as deterministic JSON (fixed key order, 15 significant digits)
//! or plain text.

use crn_planar::equilibrium::{
    chain_equilibrium_exists, detect_chain, detect_quadrangle, detect_three_reactions,
    scale_to_unit, solve_equilibrium, three_reaction_exists, SolveOptions,
};
use crn_planar::global::{
    dulac_geometric, dulac_search, lienard_center_check, reversibility_check,
    reversible_center_conditions, DulacResult, LienardCheck,
};
use crn_planar::local::{hopf_classify_at, HopfClassification, HopfReport};
use crn_planar::network::ReactionNetwork;

/// 15-significant-digit float rendering shared by every emitter.
pub fn g15(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{:.14e}", x)
    }
}

fn json_bool(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

pub struct AnalysisReport {
    pub m: usize,
    pub linkage_classes: usize,
    pub terminal_components: usize,
    pub deficiency: i64,
    pub weakly_reversible: bool,
    pub existence_predicate: Option<bool>,
    pub equilibrium: Option<(f64, f64, f64)>,
    pub local: Option<HopfReport>,
    pub dulac: Option<(DulacResult, bool)>,
    pub reversible: Option<bool>,
    pub reversible_center: Option<bool>,
    pub lienard: Option<LienardCheck>,
}

impl AnalysisReport {
    pub fn equilibrium_exists(&self) -> bool {
        self.equilibrium.is_some()
    }
}

/// Run the full pipeline on a parsed network.
pub fn build_report(net: &ReactionNetwork, focal_depth: usize) -> AnalysisReport {
    let rc = net.reversibility_class();
    let existence_predicate = if let Some(chain) = detect_chain(net) {
        chain_equilibrium_exists(&chain).ok()
    } else if let Some(three) = detect_three_reactions(net) {
        three_reaction_exists(&three).ok()
    } else {
        None
    };
    let eq = solve_equilibrium(net, &SolveOptions::default()).ok();
    let vf = net.vector_field();
    let local = eq
        .as_ref()
        .and_then(|e| hopf_classify_at(&vf, (e.x, e.y), focal_depth).ok());
    let dulac = detect_quadrangle(net).and_then(|quad| {
        dulac_search(&quad)
            .ok()
            .map(|r| (r, dulac_geometric(&quad)))
    });
    let scaled = eq.as_ref().map(|e| scale_to_unit(net, e));
    let reversible = scaled.as_ref().map(reversibility_check);
    let three = detect_three_reactions(net);
    let reversible_center = match (&scaled, &three) {
        (Some(s), Some(t)) => reversible_center_conditions(s, t).ok(),
        _ => None,
    };
    let lienard = match (&scaled, &three) {
        (Some(s), Some(t)) => lienard_center_check(s, t).ok(),
        _ => None,
    };
    AnalysisReport {
        m: net.num_complexes(),
        linkage_classes: rc.linkage_classes,
        terminal_components: rc.terminal_components,
        deficiency: net.deficiency(),
        weakly_reversible: rc.weakly_reversible,
        existence_predicate,
        equilibrium: eq.map(|e| (e.x, e.y, e.residual)),
        local,
        dulac,
        reversible,
        reversible_center,
        lienard,
    }
}

fn classification_str(c: &HopfClassification) -> String {
    match c {
        HopfClassification::Stable => "stable".into(),
        HopfClassification::Unstable => "unstable".into(),
        HopfClassification::WeakFocus { order, value } => {
            let side = if *value < 0.0 { "stable" } else { "unstable" };
            format!("weak-focus(order {order}, {side})")
        }
        HopfClassification::CenterCandidate => "center-candidate".into(),
    }
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        let mut s = String::from("{\"structural\":{");
        s.push_str(&format!(
            "\"m\":{},\"linkage_classes\":{},\"terminal_components\":{},\"deficiency\":{},\"weakly_reversible\":{}",
            self.m,
            self.linkage_classes,
            self.terminal_components,
            self.deficiency,
            json_bool(self.weakly_reversible)
        ));
        s.push_str("},\"equilibrium\":{");
        match self.equilibrium {
            Some((x, y, res)) => s.push_str(&format!(
                "\"exists\":true,\"x\":{},\"y\":{},\"residual\":{}",
                g15(x),
                g15(y),
                g15(res)
            )),
            None => s.push_str("\"exists\":false,\"x\":null,\"y\":null,\"residual\":null"),
        }
        if let Some(pred) = self.existence_predicate {
            s.push_str(&format!(",\"predicate\":{}", json_bool(pred)));
        }
        s.push_str("},\"local\":");
        match &self.local {
            Some(report) => {
                s.push_str(&format!(
                    "{{\"trace\":{},\"det\":{},",
                    g15(report.trace),
                    g15(report.det)
                ));
                match &report.focal {
                    Some(fv) => {
                        let vals: Vec<String> = fv.values.iter().map(|v| g15(*v)).collect();
                        s.push_str(&format!("\"focal_values\":[{}],", vals.join(",")));
                    }
                    None => s.push_str("\"focal_values\":null,"),
                }
                let order = match report.classification {
                    HopfClassification::WeakFocus { order, .. } => order.to_string(),
                    _ => "null".to_string(),
                };
                s.push_str(&format!(
                    "\"classification\":\"{}\",\"weak_focus_order\":{}}}",
                    classification_str(&report.classification),
                    order
                ));
            }
            None => s.push_str("null"),
        }
        s.push_str(",\"global\":{\"dulac\":");
        match &self.dulac {
            Some((d, geometric)) => {
                let rat_json = |r: Option<num_rational::Rational64>| match r {
                    Some(v) => g15(*v.numer() as f64 / *v.denom() as f64),
                    None => "null".into(),
                };
                let interval_json = |i: &Option<crn_planar::global::ExponentInterval>| match i {
                    Some(iv) => format!("[{},{}]", rat_json(iv.lo), rat_json(iv.hi)),
                    None => "null".into(),
                };
                s.push_str(&format!(
                    "{{\"found\":{},\"alpha\":{},\"beta\":{},\"alpha_interval\":{},\"beta_interval\":{},\"geometric\":{}}}",
                    json_bool(d.found),
                    rat_json(d.alpha),
                    rat_json(d.beta),
                    interval_json(&d.alpha_interval),
                    interval_json(&d.beta_interval),
                    json_bool(*geometric)
                ));
            }
            None => s.push_str("null"),
        }
        s.push_str(",\"reversible\":");
        match self.reversible {
            Some(b) => s.push_str(json_bool(b)),
            None => s.push_str("null"),
        }
        s.push_str(",\"reversible_center\":");
        match self.reversible_center {
            Some(b) => s.push_str(json_bool(b)),
            None => s.push_str("null"),
        }
        s.push_str(",\"lienard\":");
        match &self.lienard {
            Some(l) => s.push_str(&format!(
                "{{\"satisfied\":{},\"c1k1\":{},\"kd2k2\":{},\"four_kd3k3\":{},\"phi_alpha\":{},\"phi_beta\":{}}}",
                json_bool(l.satisfied),
                g15(l.c1k1),
                g15(l.kd2k2),
                g15(l.four_kd3k3),
                g15(l.phi_alpha),
                g15(l.phi_beta)
            )),
            None => s.push_str("null"),
        }
        s.push_str("}}");
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "structural: m={} linkage_classes={} terminal_components={} deficiency={} weakly_reversible={}\n",
            self.m,
            self.linkage_classes,
            self.terminal_components,
            self.deficiency,
            self.weakly_reversible
        ));
        match self.equilibrium {
            Some((x, y, res)) => out.push_str(&format!(
                "equilibrium: x={} y={} residual={:.2e}\n",
                g15(x),
                g15(y),
                res
            )),
            None => out.push_str("equilibrium: none\n"),
        }
        if let Some(p) = self.existence_predicate {
            out.push_str(&format!("existence predicate: {p}\n"));
        }
        if let Some(l) = &self.local {
            out.push_str(&format!(
                "local: trace={} det={} classification={}\n",
                g15(l.trace),
                g15(l.det),
                classification_str(&l.classification)
            ));
            if let Some(fv) = &l.focal {
                for (i, v) in fv.values.iter().enumerate() {
                    out.push_str(&format!("  L{} = {}\n", i + 1, g15(*v)));
                }
            }
        }
        if let Some((d, geometric)) = &self.dulac {
            out.push_str(&format!("dulac: found={} geometric={}", d.found, geometric));
            if let (Some(a), Some(b)) = (d.alpha, d.beta) {
                out.push_str(&format!(" witness=({a}, {b})"));
            }
            out.push('\n');
        }
        if let Some(r) = self.reversible {
            out.push_str(&format!("reversible: {r}\n"));
        }
        if let Some(r) = self.reversible_center {
            out.push_str(&format!("reversible center conditions: {r}\n"));
        }
        if let Some(l) = &self.lienard {
            out.push_str(&format!(
                "lienard center: satisfied={} products=({}, {}, {})\n",
                l.satisfied,
                g15(l.c1k1),
                g15(l.kd2k2),
                g15(l.four_kd3k3)
            ));
        }
        out.trim_end().to_string()
    }
}
