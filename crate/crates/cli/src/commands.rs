use serde::Serialize;
use serde_json::{json, Value};

use collatz_transfer::collatz::{lemma_sequences, orbit, preimage_tree};
use collatz_transfer::eigen::{
    godefroy_shapiro_witnesses, membership, periodic_point, periodic_residual, span_residual, verify_eigenrelation,
    verify_periodic, EigenSpec,
};
use collatz_transfer::ergodic::{
    build_hypercyclic_vector, invariance_test_with, materialize_sample, moment_check, sample_invariant,
    verify_certificate, visit_frequency, HypercyclicCertificate, MixtureShape, VisitReport,
};
use collatz_transfer::exact_norm::{
    certified_iterate_norm, exact_iterate_norm_sq, spectral_radius_table, work_estimate, CSV_HEADER,
};
use collatz_transfer::num::{biguint_json, format_rational, parse_rational, rational_to_f64, Real};
use collatz_transfer::transfer::iterate_norm_scan;
use collatz_transfer::{AnyVec, CoeffVec, Error, Result, Scalar, WeightDescriptor};

use crate::config::RunConfig;
use crate::input;
use crate::{CollatzCmd, EigCmd, ErgodicCmd, FieldArgs, Failure, HcCmd, NormCmd, Report, ShapeArgs};

fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("serializable")
}

fn real(r: &Real) -> String {
    match r {
        Real::Exact(q) => format_rational(q),
        Real::Approx(x) => format!("{x:e}"),
    }
}

fn vector_rows<S: Scalar>(v: &CoeffVec<S>) -> Vec<Vec<String>> {
    let Value::Object(obj) = v.to_json() else {
        unreachable!("vectors serialize to objects")
    };
    obj.get("entries")
        .and_then(Value::as_array)
        .map(|es| {
            es.iter()
                .map(|e| {
                    e.as_array()
                        .expect("entry triple")
                        .iter()
                        .map(|x| x.as_str().map_or_else(|| x.to_string(), str::to_string))
                        .collect()
                })
                .collect()
        })
        .unwrap_or_default()
}

pub fn collatz(cmd: CollatzCmd, cfg: &RunConfig) -> std::result::Result<Report, Failure> {
    let b = &cfg.budgets;
    Ok(match cmd {
        CollatzCmd::Orbit { k } => {
            let r = orbit(&input::biguint(&k)?, b.orbit_steps)?;
            let rows = r.orbit.iter().enumerate().map(|(i, x)| vec![i.to_string(), x.to_string()]).collect();
            Report {
                json: to_value(&r),
                table: Some((vec!["step", "value"], rows)),
            }
        }
        CollatzCmd::Preimages { k, n } => {
            let kb = input::biguint(&k)?;
            let tree = preimage_tree(&kb, n, b.tree_nodes)?;
            let rows = tree.iter().map(|j| vec![j.to_string()]).collect();
            Report {
                json: json!({
                    "k": biguint_json::to_value(&kb),
                    "n": n,
                    "count": tree.len(),
                    "preimages": tree.iter().map(biguint_json::to_value).collect::<Vec<_>>(),
                }),
                table: Some((vec!["preimage"], rows)),
            }
        }
        CollatzCmd::Sequences { k, mode, max_steps } => {
            let s = lemma_sequences(&input::biguint(&k)?, mode.into(), max_steps)?;
            let products: Vec<_> = (0..s.len()).map(|n| s.tracked_product(n)).collect();
            let rows = (0..s.len())
                .map(|n| {
                    vec![
                        n.to_string(),
                        s.m_seq[n].to_string(),
                        s.p_seq[n].to_string(),
                        s.j_seq[n].to_string(),
                        products[n].to_string(),
                    ]
                })
                .collect();
            let mut json = to_value(&s);
            json["tracked_products"] = products.iter().map(biguint_json::to_value).collect();
            Report {
                json,
                table: Some((vec!["n", "m", "p", "j", "tracked_product"], rows)),
            }
        }
    })
}

fn memory_notice(n: usize) {
    if n >= 8 {
        let e = work_estimate(n);
        eprintln!(
            "note: n = {n} scans {} residues with up to {} polynomials in total; estimated peak memory {:.1} MiB",
            e.residues,
            e.max_polys,
            e.peak_bytes as f64 / (1024.0 * 1024.0)
        );
    }
}

pub fn norm(cmd: NormCmd, cfg: &RunConfig) -> std::result::Result<Report, Failure> {
    let b = &cfg.budgets;
    let w = &cfg.weight;
    Ok(match cmd {
        NormCmd::Scan { n, k_max } => {
            let r = if *w == WeightDescriptor::ClassicBergman && n <= b.n_max {
                memory_notice(n);
                certified_iterate_norm(w, n, k_max, b.tree_nodes, b.n_max)?
            } else {
                iterate_norm_scan(w, n, k_max, b.tree_nodes)?
            };
            let row = vec![
                r.n.to_string(),
                r.best_k.to_string(),
                real(&r.value),
                r.scan_bound.to_string(),
                to_value(&r.exactness).as_str().unwrap_or_default().to_string(),
                r.exact_value.as_ref().map(real).unwrap_or_default(),
            ];
            Report {
                json: to_value(&r),
                table: Some((vec!["n", "best_k", "value", "scan_bound", "exactness", "exact_value"], vec![row])),
            }
        }
        NormCmd::Exact { n } => {
            if *w != WeightDescriptor::ClassicBergman {
                return Err(Error::Predicate {
                    predicate: "classic_bergman",
                    detail: format!("exact iterate norms are only available for the classic weight, not {w}"),
                }
                .into());
            }
            memory_notice(n);
            let e = exact_iterate_norm_sq(n, b.n_max)?;
            let row = vec![n.to_string(), real(&e.value), e.best_r.to_string()];
            Report {
                json: to_value(&e),
                table: Some((vec!["n", "norm_sq", "best_r"], vec![row])),
            }
        }
        NormCmd::Table { n_max } => {
            memory_notice(n_max);
            let t = spectral_radius_table(n_max, b.n_max)?;
            let rows = t.csv_records().into_iter().map(Vec::from).collect();
            Report {
                json: to_value(&t),
                table: Some((CSV_HEADER.to_vec(), rows)),
            }
        }
    })
}

fn spec(a: &FieldArgs) -> Result<EigenSpec> {
    Ok(EigenSpec::exact(a.m, collatz_transfer::num::parse_qcomplex(&a.mu)?, a.cap))
}

fn any_rows(v: &AnyVec) -> Vec<Vec<String>> {
    match v {
        AnyVec::Rational(v) => vector_rows(v),
        AnyVec::Float(v) => vector_rows(v),
    }
}

pub fn eig(cmd: EigCmd, cfg: &RunConfig) -> std::result::Result<Report, Failure> {
    let w = &cfg.weight;
    Ok(match cmd {
        EigCmd::Materialize(a) => {
            let s = spec(&a)?;
            let mat = s.materialize(w)?;
            Report {
                table: Some((vec!["degree", "re", "im"], any_rows(&mat.vec))),
                json: json!({
                    "spec": s.to_json(),
                    "vector": mat.vec.to_json(),
                    "tail_norm_sq_bound": mat.tail_norm_sq_bound,
                }),
            }
        }
        EigCmd::Verify(a) => {
            let s = spec(&a)?;
            let c = verify_eigenrelation(&s)?;
            let member = membership(s.m, &s.mu.modulus_sq(), w);
            let row = vec![
                c.window.to_string(),
                c.degrees_in_window.to_string(),
                real(&c.residual),
                c.nonzero_residuals.to_string(),
                member.to_string(),
            ];
            let mut json = to_value(&c);
            json["spec"] = s.to_json();
            json["member"] = json!(member);
            Report {
                json,
                table: Some((vec!["window", "degrees_in_window", "residual", "nonzero_residuals", "member"], vec![row])),
            }
        }
        EigCmd::Periodic { m, alpha, cap } => {
            let p = periodic_point(m, &parse_rational(&alpha)?, cap);
            let check = verify_periodic(&p)?;
            let mut rows = Vec::new();
            for t in 1..=p.period {
                let r = periodic_residual(&p, t)?;
                rows.push(vec![t.to_string(), r.window.to_string(), r.nonzero_residuals.to_string()]);
            }
            Report {
                json: json!({ "point": to_value(&p), "check": to_value(&check) }),
                table: Some((vec!["t", "window", "nonzero_residuals"], rows)),
            }
        }
        EigCmd::Witnesses { rho, cap } => {
            let g = godefroy_shapiro_witnesses(w, &parse_rational(&rho)?, cap)?;
            let rows = [("inside", &g.inside), ("outside", &g.outside)]
                .into_iter()
                .flat_map(|(side, specs)| {
                    specs.iter().map(move |s| vec![side.to_string(), s.m.to_string(), s.mu.to_string()])
                })
                .collect();
            Report {
                json: to_value(&g),
                table: Some((vec!["side", "m", "mu"], rows)),
            }
        }
        EigCmd::Span { k, fields, cap } => {
            let family = fields
                .iter()
                .map(|f| input::field(f).map(|(m, mu)| EigenSpec::exact(m, mu, cap)))
                .collect::<Result<Vec<_>>>()?;
            let r = span_residual(k, &family, w)?;
            let row = vec![
                r.target.to_string(),
                r.family_size.to_string(),
                format!("{:e}", r.residual_sq),
                format!("{:e}", r.target_norm_sq),
                format!("{:e}", r.condition),
            ];
            Report {
                json: to_value(&r),
                table: Some((vec!["target", "family_size", "residual_sq", "target_norm_sq", "condition"], vec![row])),
            }
        }
    })
}

fn certificate_rows(schedule: &[u64], errors: &[f64]) -> Vec<Vec<String>> {
    schedule
        .iter()
        .zip(errors)
        .enumerate()
        .map(|(i, (n, e))| vec![i.to_string(), n.to_string(), format!("{e:e}")])
        .collect()
}

pub fn hc(cmd: HcCmd, cfg: &RunConfig) -> std::result::Result<Report, Failure> {
    Ok(match cmd {
        HcCmd::Build { targets, epsilon } => {
            let targets = targets.iter().map(|t| input::rational_vec(t)).collect::<Result<Vec<_>>>()?;
            let eps = parse_rational(&epsilon)?;
            let c = build_hypercyclic_vector(&targets, &eps, &cfg.weight, cfg.budgets.hc())?;
            Report {
                table: Some((vec!["i", "schedule", "error"], certificate_rows(&c.schedule, &c.errors))),
                json: c.to_json(),
            }
        }
        HcCmd::Verify { certificate } => {
            let c = HypercyclicCertificate::from_json(&input::read_json(&certificate)?)?;
            let errors = verify_certificate(&c)?;
            Report {
                table: Some((vec!["i", "schedule", "error"], certificate_rows(&c.schedule, &errors))),
                json: json!({
                    "verified": true,
                    "schedule": c.schedule,
                    "epsilon": format_rational(&c.epsilon),
                    "errors": errors,
                }),
            }
        }
    })
}

fn shape(a: &ShapeArgs) -> MixtureShape {
    MixtureShape {
        max_m: a.max_m,
        atoms_per_m: a.atoms_per_m,
    }
}

fn visit_rows(r: &VisitReport) -> Vec<Vec<String>> {
    r.hit_times.iter().map(|t| vec![t.to_string()]).collect()
}

pub fn ergodic(cmd: ErgodicCmd, cfg: &RunConfig) -> std::result::Result<Report, Failure> {
    let w = &cfg.weight;
    Ok(match cmd {
        ErgodicCmd::Sample { shape: s, run, cap } => {
            let sample = sample_invariant(shape(&s), w, cfg.seed, run)?;
            let rows = sample
                .atoms
                .iter()
                .enumerate()
                .map(|(i, a)| {
                    vec![
                        i.to_string(),
                        a.m.to_string(),
                        format!("{:e}", a.mu.re),
                        format!("{:e}", a.mu.im),
                        format!("{:e}", a.g.re),
                        format!("{:e}", a.g.im),
                        format!("{:e}", a.scale),
                    ]
                })
                .collect();
            let mut json = sample.to_json();
            if let Some(cap) = cap {
                let (v, bound) = materialize_sample(&sample, cap, w)?;
                json["materialized"] = json!({ "cap": cap, "vector": v.to_json(), "truncation_norm_bound": bound });
            }
            Report {
                json,
                table: Some((vec!["atom", "m", "mu_re", "mu_im", "g_re", "g_im", "scale"], rows)),
            }
        }
        ErgodicCmd::Invariance {
            shape: s,
            runs,
            functional,
            experiments,
            mismatch,
        } => {
            let f = input::rational_vec(&functional)?.to_float();
            let mut reports = Vec::new();
            for e in 0..experiments {
                reports.push(invariance_test_with(shape(&s), &f, runs, cfg.seed + e, w, mismatch)?);
            }
            let accepted = reports.iter().filter(|r| r.p_value.is_some_and(|p| p > 0.01)).count();
            let moments = moment_check(shape(&s), runs, cfg.seed);
            let cell = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
            let rows = reports
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    vec![
                        i.to_string(),
                        r.seed.to_string(),
                        cell(r.ks_re.map(|k| k.statistic)),
                        cell(r.ks_re.map(|k| k.p_value)),
                        cell(r.ks_im.map(|k| k.statistic)),
                        cell(r.ks_im.map(|k| k.p_value)),
                        cell(r.p_value),
                        r.skipped.clone().unwrap_or_default(),
                    ]
                })
                .collect();
            Report {
                json: json!({
                    "shape": to_value(&shape(&s)),
                    "runs": runs,
                    "mismatch": mismatch,
                    "experiments": to_value(&reports),
                    "accepted_at_0_01": accepted,
                    "moments": to_value(&moments),
                }),
                table: Some((
                    vec!["experiment", "seed", "d_re", "p_re", "d_im", "p_im", "p_value", "skipped"],
                    rows,
                )),
            }
        }
        ErgodicCmd::Visits {
            x,
            target,
            certificate,
            target_index,
            periodic_alpha,
            m,
            cap,
            eps,
            horizon,
        } => {
            let eps = rational_to_f64(&parse_rational(&eps)?);
            let r = if let Some(alpha) = periodic_alpha {
                let p = periodic_point(m, &parse_rational(&alpha)?, cap);
                visit_frequency(&p.vec, &p.vec, eps, horizon, w)
            } else if let Some(path) = certificate {
                let c = HypercyclicCertificate::from_json(&input::read_json(&path)?)?;
                let t = c.targets.get(target_index).ok_or_else(|| {
                    Failure::Usage(format!("certificate has {} targets", c.targets.len()))
                })?;
                visit_frequency(&c.x, t, eps, horizon, w)
            } else {
                let (Some(x), Some(t)) = (x, target) else {
                    return Err(Failure::Usage(
                        "give --x and --target, --certificate, or --periodic-alpha".into(),
                    ));
                };
                visit_frequency(&input::rational_vec(&x)?, &input::rational_vec(&t)?, eps, horizon, w)
            };
            Report {
                table: Some((vec!["hit_time"], visit_rows(&r))),
                json: to_value(&r),
            }
        }
    })
}
