//! Compares the recession cone of each complement component with the
//! normal cone of a polytope at the component's order.

use super::{angular_mismatch_deg, normal_cone, Cone, ComponentMap, Polytope};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RecessionStatus {
    Pass,
    Fail,
    /// The order is near no vertex, edge interior or polytope interior.
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct RecessionEntry {
    pub component: u32,
    pub order: [f64; 2],
    /// Where the order sits: `vertex`, `edge`, `interior` or `none`.
    pub location: String,
    pub estimated_deg: Vec<f64>,
    pub expected_deg: Vec<f64>,
    pub mismatch_deg: f64,
    pub status: RecessionStatus,
}

#[derive(Debug, Clone, Serialize)]
pub struct RecessionReport {
    pub threshold_deg: f64,
    pub vertex_tol: f64,
    pub probe_radius: f64,
    pub entries: Vec<RecessionEntry>,
    pub all_pass: bool,
}

fn degrees(c: &Cone) -> Vec<f64> {
    let mut a: Vec<f64> = c.angles().into_iter().map(f64::to_degrees).collect();
    a.sort_by(f64::total_cmp);
    a
}

/// Expected recession cone for a component with order `nu`.
fn expected_cone(p: &Polytope, nu: [f64; 2], tol: f64) -> Option<(Cone, &'static str)> {
    if let Some(i) = p.vertex_index(&nu, tol) {
        return normal_cone(p, &p.vertices[i]).ok().map(|c| (c, "vertex"));
    }
    if p.degenerate {
        if p.vertices.len() == 2 && p.distance(&nu) <= tol {
            let (a, b) = (p.vertex2(0), p.vertex2(1));
            let n = vec![a[1] - b[1], b[0] - a[0]];
            return Some((Cone::new(2, vec![n.clone(), vec![-n[0], -n[1]]]), "edge"));
        }
        return None;
    }
    let slack: Vec<f64> = p.facets.iter().map(|f| f.offset - (f.normal[0] * nu[0] + f.normal[1] * nu[1])).collect();
    if slack.iter().all(|&s| s > tol) {
        return Some((Cone::zero(2), "interior"));
    }
    if p.distance(&nu) <= tol {
        let near: Vec<usize> = (0..slack.len()).filter(|&k| slack[k].abs() <= tol).collect();
        if near.len() == 1 {
            return Some((Cone::new(2, vec![p.facets[near[0]].normal.clone()]), "edge"));
        }
    }
    None
}

/// Runs the comparison for every `(component, order)` pair.
pub fn check_recession(
    map: &ComponentMap,
    polytope: &Polytope,
    orders: &[(u32, [f64; 2])],
    r_probe: f64,
    threshold_deg: f64,
    vertex_tol: f64,
) -> RecessionReport {
    let entries: Vec<RecessionEntry> = orders
        .iter()
        .map(|&(id, nu)| {
            let est = map.recession_cone_estimate(id, r_probe);
            match expected_cone(polytope, nu, vertex_tol) {
                Some((exp, loc)) => {
                    let mismatch = angular_mismatch_deg(&est, &exp);
                    RecessionEntry {
                        component: id,
                        order: nu,
                        location: loc.into(),
                        estimated_deg: degrees(&est),
                        expected_deg: degrees(&exp),
                        mismatch_deg: mismatch,
                        status: if mismatch <= threshold_deg { RecessionStatus::Pass } else { RecessionStatus::Fail },
                    }
                }
                None => RecessionEntry {
                    component: id,
                    order: nu,
                    location: "none".into(),
                    estimated_deg: degrees(&est),
                    expected_deg: vec![],
                    mismatch_deg: f64::NAN,
                    status: RecessionStatus::Inconclusive,
                },
            }
        })
        .collect();
    let all_pass = entries.iter().all(|e| e.status == RecessionStatus::Pass);
    RecessionReport { threshold_deg, vertex_tol, probe_radius: r_probe, entries, all_pass }
}
