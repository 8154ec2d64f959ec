//! Named benchmark scenarios.
//!
//! Every preset is pinned byte-for-byte against `fixtures/presets.json`, so
//! any change to a parameter value is a deliberate, reviewable diff.

use crate::error::{Error, Result};

use super::{
    AlphaRule, BetaSpec, HeadFill, HeadTail, SettingA, SettingB, SettingSpec, SimulationSpec,
};

/// Canonical preset names, in listing order.
pub fn list_presets() -> Vec<&'static str> {
    vec![
        "A-p3",
        "A-p30",
        "A-p250",
        "A-weak",
        "A-nonlinear",
        "B-p3",
        "B-p30",
        "B-p250",
        "B-diversity",
    ]
}

/// Look up a preset by name (case-insensitive).
pub fn preset(name: &str) -> Result<SimulationSpec> {
    match name.to_ascii_lowercase().as_str() {
        "a-p3" => Ok(a_p3()),
        "a-p30" => Ok(a_p30()),
        "a-p250" => Ok(a_p250()),
        "a-weak" => Ok(a_weak()),
        "a-nonlinear" => Ok(a_nonlinear()),
        "b-p3" => Ok(b_p3()),
        "b-p30" => Ok(b_p30()),
        "b-p250" => Ok(b_p250()),
        "b-diversity" => Ok(b_diversity()),
        _ => Err(Error::invalid(format!(
            "unknown preset {name:?}; available: {}",
            list_presets().join(", ")
        ))),
    }
}

fn head_fill(head: &[f64], len: usize, fill: f64) -> Vec<f64> {
    let mut v = head.to_vec();
    v.resize(len, fill);
    v
}

fn a_p3() -> SimulationSpec {
    SimulationSpec {
        setting: SettingSpec::A(SettingA {
            p: 3,
            q: 2,
            mu_c: -3.0,
            alpha0: vec![1.0, 1.0],
            alpha: AlphaRule::Explicit { rows: vec![vec![0.5, 0.3], vec![-0.15, 0.7]] },
            c_x: vec![0.5, 0.5],
            beta0: 0.5,
            beta: BetaSpec::Ilr(vec![4.0, 1.0]),
            c_y: 4.0,
            nonlinear: false,
        }),
        n: 1000,
        m_interventions: 250,
    }
}

fn a_p30() -> SimulationSpec {
    SimulationSpec {
        setting: SettingSpec::A(SettingA {
            p: 30,
            q: 10,
            mu_c: 5.0,
            alpha0: head_fill(&[3.0, 1.0, 1.0, 1.0, 3.0, 1.0, 1.0, 1.0], 29, 0.0),
            alpha: AlphaRule::OffDiagonalBlock { size: 8 },
            c_x: head_fill(&[-2.0, -1.0, -1.0, -1.0, 2.0, 1.0, 1.0, 1.0], 29, 0.0),
            beta0: 5.0,
            beta: BetaSpec::Log(head_fill(
                &[10.0, 5.0, 5.0, 5.0, -10.0, -5.0, -5.0, -5.0],
                30,
                0.0,
            )),
            c_y: 5.0,
            nonlinear: false,
        }),
        n: 10_000,
        m_interventions: 250,
    }
}

fn a_p250() -> SimulationSpec {
    SimulationSpec {
        setting: SettingSpec::A(SettingA {
            p: 250,
            q: 10,
            mu_c: 3.0,
            alpha0: head_fill(
                &[1.0, 1.0, 3.0, 1.0, 1.0, 1.0, 3.0, 1.0, 1.0, 1.0, 3.0, 1.0],
                249,
                0.0,
            ),
            alpha: AlphaRule::OffDiagonalBlock { size: 8 },
            c_x: head_fill(
                &[-1.0, 2.0, -1.0, 2.0, -1.0, 2.0, -2.0, 1.0, -2.0, 1.0, -2.0, 1.0],
                249,
                0.0,
            ),
            beta0: 5.0,
            beta: BetaSpec::Log(head_fill(
                &[10.0, 5.0, 5.0, 5.0, -10.0, -5.0, -5.0, -5.0],
                250,
                0.0,
            )),
            c_y: 5.0,
            nonlinear: false,
        }),
        n: 10_000,
        m_interventions: 250,
    }
}

fn a_weak() -> SimulationSpec {
    SimulationSpec {
        setting: SettingSpec::A(SettingA {
            p: 3,
            q: 2,
            mu_c: -2.0,
            alpha0: vec![4.0, 1.0],
            alpha: AlphaRule::Explicit { rows: vec![vec![0.15, 0.2], vec![0.15, 0.0]] },
            c_x: vec![1.0, 1.0],
            beta0: 2.0,
            beta: BetaSpec::Ilr(vec![6.0, 2.0]),
            c_y: 4.0,
            nonlinear: false,
        }),
        n: 1000,
        m_interventions: 250,
    }
}

fn a_nonlinear() -> SimulationSpec {
    SimulationSpec {
        setting: SettingSpec::A(SettingA {
            p: 3,
            q: 2,
            mu_c: -1.0,
            alpha0: vec![1.0, 1.0],
            alpha: AlphaRule::Explicit { rows: vec![vec![4.0, -1.0], vec![1.0, 3.0]] },
            c_x: vec![2.0, 2.0],
            beta0: 0.5,
            beta: BetaSpec::Ilr(vec![6.0, 2.0]),
            c_y: 4.0,
            nonlinear: true,
        }),
        n: 1000,
        m_interventions: 250,
    }
}

fn b_p3() -> SimulationSpec {
    SimulationSpec {
        setting: SettingSpec::B(SettingB {
            p: 3,
            q: 3,
            z_range: (0.0, 10.0),
            u_range: (0.2, 3.0),
            alpha0: HeadTail::explicit(vec![7.0, 9.0, 8.0]),
            alpha: AlphaRule::Explicit {
                rows: vec![
                    vec![5.0, 0.0, 0.0],
                    vec![0.0, 5.0, 0.0],
                    vec![0.0, 0.0, 5.0],
                ],
            },
            theta: 2.0,
            eta: HeadFill::explicit(vec![0.0, 0.0, 0.0]),
            omega_c: HeadTail::explicit(vec![0.7, 0.1, 0.2]),
            beta0: 1.0,
            beta_log: vec![-5.0, 3.0, 2.0],
            c_y: vec![2.0, -10.0, -10.0],
        }),
        n: 1000,
        m_interventions: 250,
    }
}

fn b_p30() -> SimulationSpec {
    SimulationSpec {
        setting: SettingSpec::B(SettingB {
            p: 30,
            q: 10,
            z_range: (0.0, 10.0),
            u_range: (0.2, 3.0),
            alpha0: HeadTail {
                head: vec![1.0, 1.0, 2.0, 1.0, 4.0, 4.0, 2.0, 1.0, 4.0, 4.0, 2.0, 1.0],
                tail_choices: vec![1.0, 2.0, 2.0],
            },
            alpha: AlphaRule::OffDiagonalBlock { size: 8 },
            theta: 2.0,
            eta: HeadFill { head: vec![0.0; 12], fill: 0.8 },
            omega_c: HeadTail {
                head: vec![0.2, 0.3, 0.2, 0.1],
                tail_choices: vec![0.01, 0.05],
            },
            beta0: 1.0,
            beta_log: head_fill(&[-10.0, -5.0, -5.0, -5.0, 10.0, 5.0, 5.0, 5.0], 30, 0.0),
            c_y: {
                let mut v = vec![10.0, 10.0, 5.0, 15.0];
                v.extend([-5.0; 8]);
                v.resize(30, 0.0);
                v
            },
        }),
        n: 10_000,
        m_interventions: 250,
    }
}

fn b_p250() -> SimulationSpec {
    SimulationSpec {
        setting: SettingSpec::B(SettingB {
            p: 250,
            q: 10,
            z_range: (0.0, 10.0),
            u_range: (0.2, 3.0),
            alpha0: HeadTail {
                head: vec![1.0, 1.0, 2.0, 1.0, 4.0, 4.0, 2.0, 1.0, 4.0, 4.0, 2.0, 1.0],
                tail_choices: vec![1.0, 2.0, 2.0],
            },
            alpha: AlphaRule::OffDiagonalBlock { size: 8 },
            theta: 2.0,
            eta: HeadFill { head: vec![0.0; 12], fill: 0.8 },
            omega_c: HeadTail {
                head: vec![0.2, 0.3, 0.2, 0.1],
                tail_choices: vec![0.01, 0.05],
            },
            beta0: 1.0,
            beta_log: head_fill(&[-10.0, -5.0, -5.0, -5.0, 10.0, 5.0, 5.0, 5.0], 250, 0.0),
            c_y: {
                let mut v = vec![10.0, 10.0, 5.0, 15.0];
                v.extend([-5.0; 8]);
                v.resize(250, 0.0);
                v
            },
        }),
        n: 10_000,
        m_interventions: 250,
    }
}

/// A scenario built so that instrumented diversity regressions contradict
/// each other: the instrument concentrates the dominant component (pushing
/// the Simpson index down) while growing the rare tail (pushing Shannon
/// entropy up). The confounder reshuffles mass within the tail only, so
/// neither channel depends on it.
fn b_diversity() -> SimulationSpec {
    let mut omega = vec![0.04; 4];
    let mut c_y = vec![0.0; 4];
    for i in 0..20 {
        omega.push(if i % 2 == 0 { 0.06 } else { 0.02 });
        c_y.push(if i % 2 == 0 { 0.15 } else { -0.15 });
    }
    SimulationSpec {
        setting: SettingSpec::B(SettingB {
            p: 24,
            q: 1,
            z_range: (0.0, 1.0),
            u_range: (0.2, 3.0),
            alpha0: HeadTail::explicit(head_fill(&[250.0, 250.0, 250.0, 80.0], 24, 2.0)),
            alpha: AlphaRule::Explicit {
                rows: vec![head_fill(&[600.0, -200.0, -200.0, 0.0], 24, 15.0)],
            },
            theta: 50.0,
            eta: HeadFill { head: Vec::new(), fill: 0.0 },
            omega_c: HeadTail::explicit(omega),
            beta0: 0.0,
            beta_log: head_fill(&[5.0, -5.0], 24, 0.0),
            c_y,
        }),
        n: 1000,
        m_interventions: 250,
    }
}
