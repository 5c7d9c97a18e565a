//! Figure presets. Each id expands to the jobs that regenerate its data.

use serde::Serialize;
use starkskin_core::model::{Boundary, LatticeSpec, LossProfile};
use starkskin_core::spectrum::Branch;
use starkskin_core::transfer::ConvergenceCase;
use starkskin_core::{Profile, Spec};

use crate::config::{Experiment, Grid, Job, ModeSelection};

#[derive(Debug, Clone, Serialize)]
pub struct FigurePreset {
    pub id: &'static str,
    pub title: &'static str,
    /// Parameters as captioned.
    pub parameters: &'static str,
    pub jobs: Vec<Job>,
}

const T1: f64 = 0.4;
const T2: f64 = 0.5;

fn logarithmic() -> Profile {
    LossProfile::Logarithmic { a: 20.0, b: 100.0 }
}

fn linear() -> Profile {
    LossProfile::Linear { gamma0: 0.25 }
}

fn quadratic() -> Profile {
    LossProfile::Polynomial {
        coefficient: 0.25,
        alpha: 2.0,
    }
}

fn exponential() -> Profile {
    LossProfile::Exponential { c: 0.25, alpha: 0.1 }
}

fn spec(t1: f64, l: usize, profile: Profile) -> Spec {
    LatticeSpec::new(t1, T2, l, profile).with_boundary(Boundary::Obc)
}

fn job(label: &str, spec: Spec, experiment: Experiment) -> Job {
    Job {
        label: label.to_string(),
        spec,
        experiment,
    }
}

fn spectrum(with_pbc: bool) -> Experiment {
    Experiment::Spectrum {
        decoupled: false,
        with_pbc,
    }
}

fn modes(select: ModeSelection) -> Experiment {
    Experiment::Modes { select }
}

fn t1_grid() -> Grid {
    Grid::Range {
        start: 0.05,
        stop: 1.0,
        step: 0.025,
    }
}

fn gm(case: ConvergenceCase<f64>, t1: Grid, kappa_points: usize) -> Experiment {
    Experiment::GmScan { case, t1, kappa_points }
}

fn lengths(from: usize, to: usize, step: usize) -> Vec<usize> {
    (from..=to).step_by(step).collect()
}

pub fn figures() -> Vec<FigurePreset> {
    let l60 = |p: Profile| spec(T1, 60, p);
    let sample = |count, branch| ModeSelection::Sample {
        count,
        branch: Some(branch),
    };
    let mut out = vec![
        FigurePreset {
            id: "main-2a",
            title: "T-shaped spectrum, logarithmic loss (OBC with PBC inset)",
            parameters: "t1=0.4, t2=0.5, L=60, gamma_n=20 ln(1+n/100)",
            jobs: vec![job("spectrum", l60(logarithmic()), spectrum(true))],
        },
        FigurePreset {
            id: "main-2b",
            title: "T-shaped spectrum, linear loss (OBC with PBC inset)",
            parameters: "t1=0.4, t2=0.5, L=60, gamma_n=0.25n",
            jobs: vec![job("spectrum", l60(linear()), spectrum(true))],
        },
        FigurePreset {
            id: "main-2c",
            title: "T-shaped spectrum, quadratic loss (OBC with PBC inset)",
            parameters: "t1=0.4, t2=0.5, L=60, gamma_n=0.25n^2",
            jobs: vec![job("spectrum", l60(quadratic()), spectrum(true))],
        },
        FigurePreset {
            id: "main-2d",
            title: "T-shaped spectrum, exponential loss (OBC with PBC inset)",
            parameters: "t1=0.4, t2=0.5, L=60, gamma_n=0.25 e^(0.1n)",
            jobs: vec![job("spectrum", l60(exponential()), spectrum(true))],
        },
        FigurePreset {
            id: "main-2e",
            title: "Eigenstate profiles, four from each branch",
            parameters: "t1=0.4, t2=0.5, L=60, gamma_n=0.25n",
            jobs: vec![
                job("minus", l60(linear()), modes(sample(4, Branch::Minus))),
                job("vertical", l60(linear()), modes(sample(4, Branch::Vertical))),
            ],
        },
        FigurePreset {
            id: "main-2f",
            title: "Chain-resolved probabilities, Minus branch",
            parameters: "t1=0.4, t2=0.5, L=60, gamma_n=0.25n",
            jobs: vec![job("spectrum", l60(linear()), spectrum(false))],
        },
        FigurePreset {
            id: "main-2g",
            title: "Chain-resolved probabilities, Vertical branch",
            parameters: "t1=0.4, t2=0.5, L=60, gamma_n=0.25n",
            jobs: vec![job("spectrum", l60(linear()), spectrum(false))],
        },
        FigurePreset {
            id: "main-3a",
            title: "Spectrum with inter-chain coupling off",
            parameters: "t1=0.4, t2=0.5, L=60, gamma_n=0.25n",
            jobs: vec![job(
                "decoupled",
                l60(linear()),
                Experiment::Spectrum {
                    decoupled: true,
                    with_pbc: false,
                },
            )],
        },
        FigurePreset {
            id: "main-3b",
            title: "Spectrum with inter-chain coupling on, typical eigenstates",
            parameters: "t1=0.4, t2=0.5, L=60, gamma_n=0.25n",
            jobs: vec![
                job("spectrum", l60(linear()), spectrum(false)),
                job("minus", l60(linear()), modes(sample(1, Branch::Minus))),
                job("vertical", l60(linear()), modes(sample(1, Branch::Vertical))),
            ],
        },
        FigurePreset {
            id: "main-4a",
            title: "Uniform loss: interfering bulk waves",
            parameters: "t1=0.4, t2=0.5, L=60, gamma=5",
            jobs: vec![job(
                "uniform",
                l60(LossProfile::Uniform { gamma: 5.0 }),
                modes(sample(1, Branch::Minus)),
            )],
        },
        FigurePreset {
            id: "main-4b",
            title: "Linear loss: single decaying wave",
            parameters: "t1=0.4, t2=0.5, L=60, gamma_n=0.25n",
            jobs: vec![job("linear", l60(linear()), modes(ModeSelection::Cleanest { count: 1 }))],
        },
        FigurePreset {
            id: "main-4c",
            title: "|lambda+-(n)| against n",
            parameters: "t1=0.4, t2=0.5, L=60, gamma_n=0.25n",
            jobs: vec![job("linear", l60(linear()), modes(ModeSelection::Cleanest { count: 1 }))],
        },
        FigurePreset {
            id: "main-4d",
            title: "Decomposition components psi_n+- against n",
            parameters: "t1=0.4, t2=0.5, L=60, gamma_n=0.25n",
            jobs: vec![job("linear", l60(linear()), modes(ModeSelection::Cleanest { count: 1 }))],
        },
    ];
    let scan_profiles = [
        ("logarithmic", logarithmic()),
        ("linear", linear()),
        ("quadratic", quadratic()),
        ("exponential", exponential()),
    ];
    out.push(FigurePreset {
        id: "sm-s1",
        title: "Delta E against L for four loss profiles",
        parameters: "t1=0.4, t2=0.5; logarithmic, linear, quadratic, exponential",
        jobs: scan_profiles
            .iter()
            .map(|(name, p)| {
                job(
                    name,
                    spec(T1, 20, p.clone()),
                    Experiment::DeltaEScan {
                        lengths: lengths(20, 60, 10),
                    },
                )
            })
            .collect(),
    });
    out.push(FigurePreset {
        id: "sm-s2",
        title: "Mean |lambda0-| over the Minus branch against L",
        parameters: "t1=0.4, t2=0.5, gamma_n=0.25n",
        jobs: vec![job(
            "linear",
            spec(T1, 20, linear()),
            Experiment::Lambda0Scan {
                lengths: lengths(20, 100, 10),
            },
        )],
    });
    out.push(FigurePreset {
        id: "sm-s3a",
        title: "|lambda1/lambda0| against kappa, vanishing increments",
        parameters: "t1=0.4, t2=0.5",
        jobs: vec![job(
            "sublinear",
            spec(T1, 100, logarithmic()),
            gm(ConvergenceCase::Sublinear, Grid::Values(vec![T1]), 512),
        )],
    });
    for (id, e) in [("sm-s3b", [-0.270, -0.079]), ("sm-s3c", [-0.485, -0.025])] {
        out.push(FigurePreset {
            id,
            title: "Eigenstate profile, logarithmic loss",
            parameters: if id == "sm-s3b" {
                "t1=0.4, t2=0.5, gamma_n=20 ln(1+n/100), E=-0.270-0.079i, L=100"
            } else {
                "t1=0.4, t2=0.5, gamma_n=20 ln(1+n/100), E=-0.485-0.025i, L=100"
            },
            jobs: vec![job(
                "logarithmic",
                spec(T1, 100, logarithmic()),
                modes(ModeSelection::Nearest { energy: e }),
            )],
        });
    }
    out.push(FigurePreset {
        id: "sm-s4a",
        title: "|lambda1/lambda0| against kappa with geometric means, linear loss",
        parameters: "t1=0.4, t2=0.5, gamma_n=0.25n",
        jobs: vec![job(
            "linear",
            spec(T1, 60, linear()),
            gm(ConvergenceCase::Linear { gamma0: 0.25 }, Grid::Values(vec![T1]), 512),
        )],
    });
    for (id, title, case) in [
        ("sm-s4b", "GM against t1, sublinear case", ConvergenceCase::Sublinear),
        ("sm-s4c", "GM against t1, linear case gamma0=0.25", ConvergenceCase::Linear { gamma0: 0.25 }),
        ("sm-s4d", "GM against t1, superlinear polynomial case", ConvergenceCase::Superlinear),
    ] {
        out.push(FigurePreset {
            id,
            title,
            parameters: "t2=0.5, t1 in [0.05, 1.0] step 0.025",
            jobs: vec![job("gm", spec(T1, 60, linear()), gm(case, t1_grid(), 0))],
        });
    }
    let fig5 = || spec(T1, 20, linear());
    let e5 = [-0.291, -0.190];
    out.push(FigurePreset {
        id: "sm-s5a",
        title: "|lambda+-(n)| in a short lattice",
        parameters: "t1=0.4, t2=0.5, L=20, gamma_n=0.25n, E=-0.291-0.190i",
        jobs: vec![job("flow", fig5(), Experiment::TransferFlow { energy: e5, snap: true })],
    });
    out.push(FigurePreset {
        id: "sm-s5b",
        title: "Eigenstate profile in a short lattice, finite-size criterion",
        parameters: "t1=0.4, t2=0.5, L=20, gamma_n=0.25n, E=-0.291-0.190i",
        jobs: vec![
            job("mode", fig5(), modes(ModeSelection::Nearest { energy: e5 })),
            job("isse", fig5(), Experiment::IsseCheck { energy: e5, snap: false }),
        ],
    });
    for (id, t1) in [("sm-eigenstates-a", 0.05), ("sm-eigenstates-b", 0.5), ("sm-eigenstates-c", 1.0)] {
        out.push(FigurePreset {
            id,
            title: "Eight random Minus-branch eigenstates, logarithmic loss",
            parameters: match id {
                "sm-eigenstates-a" => "t1=0.05, t2=0.5, gamma_n=20 ln(1+n/100), L=100",
                "sm-eigenstates-b" => "t1=0.5, t2=0.5, gamma_n=20 ln(1+n/100), L=100",
                _ => "t1=1, t2=0.5, gamma_n=20 ln(1+n/100), L=100",
            },
            jobs: vec![job("logarithmic", spec(t1, 100, logarithmic()), modes(sample(8, Branch::Minus)))],
        });
    }
    out
}

pub fn lookup(id: &str) -> Option<FigurePreset> {
    figures().into_iter().find(|f| f.id == id)
}
