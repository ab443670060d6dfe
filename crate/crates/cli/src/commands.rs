use serde_json::{json, Value};
use superspecial::brandt::{brandt_from_neighbors, brandt_matrix, ideal_classes, BrandtMatrix};
use superspecial::hermitian::cache;
use superspecial::hermitian::classes::check_parameters;
use superspecial::hermitian::{class_set, default_auxiliary_prime, PolarizedClassSet};
use superspecial::isogeny_graphs::{build_big, build_enhanced, build_little, strip_half_edges};
use superspecial::spectra::{char_poly, ramanujan_report};
use superspecial::Rational;

use crate::{Failure, Format, Kind, Method, RunConfig};

pub fn render(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON values always serialize") + "\n"
}

fn strings<T: ToString>(xs: &[T]) -> Vec<String> {
    xs.iter().map(T::to_string).collect()
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn consistency(msg: impl Into<String>) -> Failure {
    Failure::Computation { check: "consistency", message: msg.into() }
}

pub fn check_base(cfg: &RunConfig) -> Result<(), Failure> {
    check_parameters(cfg.p, cfg.g, default_auxiliary_prime(cfg.p))?;
    Ok(())
}

pub fn check_ell(cfg: &RunConfig, ell: u64) -> Result<(), Failure> {
    check_parameters(cfg.p, cfg.g, ell)?;
    Ok(())
}

/// Computes a class set from scratch, without touching the cache.
pub fn compute_classes(cfg: &RunConfig) -> Result<PolarizedClassSet, Failure> {
    check_base(cfg)?;
    if cfg.verbose {
        eprintln!("enumerating classes for p={} g={}", cfg.p, cfg.g);
    }
    Ok(class_set(cfg.p, cfg.g, default_auxiliary_prime(cfg.p))?)
}

/// The class set for `(p, g)`, from the cache when present.
pub fn load_classes(cfg: &RunConfig) -> Result<PolarizedClassSet, Failure> {
    check_base(cfg)?;
    let Some(dir) = &cfg.cache_dir else {
        return compute_classes(cfg);
    };
    if let Some(set) = cache::load(dir, cfg.p, cfg.g)? {
        return Ok(set);
    }
    let set = compute_classes(cfg)?;
    let path = cache::save(dir, &set)?;
    if cfg.verbose {
        eprintln!("wrote {}", path.display());
    }
    Ok(set)
}

pub fn classes_json(set: &PolarizedClassSet) -> Value {
    let classes: Vec<Value> = set
        .classes()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let rec = cache::cached_class(c);
            let mut v = json!({
                "index": i.to_string(),
                "e": c.aut_count().to_string(),
                "gram": rec.gram.iter().map(|r| strings(r)).collect::<Vec<_>>(),
                "hermitian": rec.hermitian,
            });
            if let (Some(b), Some(d)) = (rec.basis, rec.scale) {
                v["basis"] = json!(b.iter().map(|r| strings(r)).collect::<Vec<_>>());
                v["scale"] = json!(d.to_string());
            }
            v
        })
        .collect();
    json!({
        "p": set.p().to_string(),
        "g": set.g().to_string(),
        "h": set.h().to_string(),
        "e": strings(&set.aut_counts()),
        "mass": superspecial::brandt::rational_to_string_plain(&set.mass()),
        "fingerprint": set.fingerprint(),
        "classes": classes,
    })
}

pub fn classes(cfg: &RunConfig, format: Format) -> Result<String, Failure> {
    let set = load_classes(cfg)?;
    match format {
        Format::Json => Ok(render(&classes_json(&set))),
        Format::Csv => {
            let mut out = String::from("index,e\n");
            for (i, e) in set.aut_counts().iter().enumerate() {
                out.push_str(&format!("{i},{e}\n"));
            }
            Ok(out)
        }
        Format::Dot => Err(usage("classes supports --format json or csv")),
    }
}

pub fn compute_brandt(set: &PolarizedClassSet, n: u64, method: Method) -> Result<BrandtMatrix, Failure> {
    match method {
        Method::Hermitian => Ok(brandt_matrix(set, n)?),
        Method::Neighbors => {
            if !superspecial::arith::is_prime(n) || n == set.p() {
                return Err(usage(format!("--method neighbors needs a prime level different from p, got {n}")));
            }
            Ok(brandt_from_neighbors(set, n)?)
        }
        Method::Ideals => {
            if set.g() != 1 {
                return Err(usage("--method ideals is only defined for g = 1"));
            }
            if n == 0 {
                return Err(usage("n must be positive"));
            }
            let ideals = ideal_classes(set.p(), default_auxiliary_prime(set.p()))?;
            let map = ideals.correspondence(set)?;
            let b = superspecial::brandt::ideals::brandt_for_ideals(&ideals, n)?;
            Ok(b.reorder(&map, set.fingerprint()))
        }
    }
}

pub fn brandt(cfg: &RunConfig, n: u64, method: Method, format: Format) -> Result<String, Failure> {
    if format == Format::Dot {
        return Err(usage("brandt supports --format json or csv"));
    }
    check_base(cfg)?;
    let set = load_classes(cfg)?;
    let b = compute_brandt(&set, n, method)?;
    Ok(match format {
        Format::Csv => b.to_csv(),
        _ => render(&b.to_json()),
    })
}

pub fn graph(cfg: &RunConfig, ell: u64, kind: Kind, strip: bool, format: Format) -> Result<String, Failure> {
    if format == Format::Csv {
        return Err(usage("graph supports --format json or dot"));
    }
    check_ell(cfg, ell)?;
    if strip && kind == Kind::Big {
        return Err(usage("--strip-half-edges needs a graph with opposites (little or enhanced)"));
    }
    let set = load_classes(cfg)?;
    let name = format!("{}_g{}_l{}_p{}", kind_name(kind), cfg.g, ell, cfg.p);
    let (mut value, graph) = match kind {
        Kind::Big => {
            let g = build_big(&set, ell)?;
            (g.to_json(), g)
        }
        Kind::Little => {
            let g = build_little(&set, ell)?;
            let g = if strip { strip_half_edges(&g) } else { g };
            (g.to_json(), g)
        }
        Kind::Enhanced => {
            let e = build_enhanced(&build_little(&set, ell)?)?;
            // the enhanced graph has no half-edges
            (e.to_json(), e.graph)
        }
    };
    Ok(match format {
        Format::Dot => graph.to_dot(&name),
        _ => {
            value["p"] = json!(cfg.p.to_string());
            value["g"] = json!(cfg.g.to_string());
            value["ell"] = json!(ell.to_string());
            value["kind"] = json!(kind_name(kind));
            render(&value)
        }
    })
}

pub fn kind_name(kind: Kind) -> &'static str {
    match kind {
        Kind::Big => "big",
        Kind::Little => "little",
        Kind::Enhanced => "enhanced",
    }
}

pub fn integral(m: &[Vec<Rational>]) -> Result<Vec<Vec<i64>>, Failure> {
    use num_traits::ToPrimitive;
    m.iter()
        .map(|r| {
            r.iter()
                .map(|x| {
                    x.is_integer()
                        .then(|| x.to_integer().to_i64())
                        .flatten()
                        .ok_or_else(|| consistency(format!("non-integral weighted adjacency entry {x}")))
                })
                .collect()
        })
        .collect()
}

fn to_i64(m: Vec<Vec<u64>>) -> Vec<Vec<i64>> {
    m.into_iter().map(|r| r.into_iter().map(|x| x as i64).collect()).collect()
}

/// The matrix whose spectrum is reported, the plain adjacency matrix, and bipartiteness.
pub fn spectral_matrices(set: &PolarizedClassSet, ell: u64, kind: Kind) -> Result<(Vec<Vec<i64>>, Vec<Vec<i64>>, bool), Failure> {
    Ok(match kind {
        Kind::Big => {
            let a = to_i64(build_big(set, ell)?.adjacency());
            (a.clone(), a, false)
        }
        Kind::Little => {
            let g = build_little(set, ell)?;
            (integral(&g.weighted_adjacency())?, to_i64(g.adjacency()), false)
        }
        Kind::Enhanced => {
            let e = build_enhanced(&build_little(set, ell)?)?;
            (integral(&e.graph.weighted_adjacency())?, to_i64(e.graph.adjacency()), true)
        }
    })
}

pub fn spectrum_json(set: &PolarizedClassSet, ell: u64, kind: Kind) -> Result<Value, Failure> {
    let (m, ad, bipartite) = spectral_matrices(set, ell, kind)?;
    let report = ramanujan_report(&m, bipartite)?;
    let mut v = report.to_json();
    v["p"] = json!(set.p().to_string());
    v["g"] = json!(set.g().to_string());
    v["ell"] = json!(ell.to_string());
    v["kind"] = json!(kind_name(kind));
    v["matrix"] = json!(if kind == Kind::Big { "adjacency" } else { "weighted_adjacency" });
    if kind != Kind::Big {
        v["adjacency_char_poly"] = json!(strings(&char_poly(&ad)));
    }
    Ok(v)
}

pub fn spectrum(cfg: &RunConfig, ell: u64, kind: Kind, format: Format) -> Result<String, Failure> {
    if format != Format::Json {
        return Err(usage("spectrum supports --format json only"));
    }
    check_ell(cfg, ell)?;
    let set = load_classes(cfg)?;
    Ok(render(&spectrum_json(&set, ell, kind)?))
}
