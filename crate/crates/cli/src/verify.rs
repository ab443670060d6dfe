use serde_json::{json, Value};
use superspecial::brandt::reference::{h5_brandt, h5_class_number};
use superspecial::brandt::{
    brandt_from_neighbors, brandt_matrix, match_up_to_permutation, row_sum_check, BrandtMatrix, PermutationMatch,
};
use superspecial::hermitian::{cache, expected_mass, PolarizedClassSet};
use superspecial::isogeny_graphs::{build_big, build_enhanced, build_little};
use superspecial::spectra::{char_poly, negate_variable, poly_mul, ramanujan_report};

use crate::commands::{check_ell, compute_brandt, compute_classes, integral, render};
use crate::{Failure, Format, Method, RunConfig};

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn describe(f: Failure) -> String {
    match f {
        Failure::Usage(m) => m,
        Failure::Computation { check, message } => format!("[{check}] {message}"),
        Failure::Checks { failed, .. } => failed.join(", "),
    }
}

struct Suite {
    checks: Vec<Check>,
}

impl Suite {
    fn run(&mut self, name: &'static str, f: impl FnOnce() -> Result<(bool, String), Failure>) {
        let (pass, detail) = f().unwrap_or_else(|e| (false, describe(e)));
        self.checks.push(Check { name, pass, detail });
    }
}

fn cache_check(cfg: &RunConfig, suite: &mut Suite) -> Option<PolarizedClassSet> {
    let mut loaded = None;
    suite.run("cache-integrity", || {
        let Some(dir) = &cfg.cache_dir else {
            return Ok((true, "cache disabled".into()));
        };
        match cache::load(dir, cfg.p, cfg.g)? {
            Some(set) => {
                loaded = Some(set);
                Ok((true, "cache verified".into()))
            }
            None => Ok((true, "no cache file".into())),
        }
    });
    loaded
}

fn ad_matches(a: &[Vec<u64>], b: &[Vec<i64>]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(r, s)| r.iter().zip(s).all(|(&x, &y)| x as i64 == y))
}

pub fn verify(cfg: &RunConfig, ell: u64, format: Format) -> Result<String, Failure> {
    if format != Format::Json {
        return Err(Failure::Usage("verify supports --format json only".into()));
    }
    check_ell(cfg, ell)?;
    let mut suite = Suite { checks: Vec::new() };
    let set = match cache_check(cfg, &mut suite) {
        Some(set) => set,
        None => {
            let set = compute_classes(cfg)?;
            if let Some(dir) = &cfg.cache_dir {
                if suite.checks.iter().all(|c| c.pass) {
                    cache::save(dir, &set)?;
                }
            }
            set
        }
    };
    let (p, g) = (cfg.p, cfg.g);

    suite.run("cache-round-trip", || {
        let text = cache::to_json_string(&set)?;
        let back = cache::from_json_str(&text, p, g)?
            .ok_or_else(|| Failure::Computation { check: "cache-round-trip", message: "version rejected".into() })?;
        Ok((back.fingerprint() == set.fingerprint() && back.aut_counts() == set.aut_counts(), set.fingerprint()))
    });
    suite.run("mass", || {
        let (m, want) = (set.mass(), expected_mass(p, g));
        Ok((m == want, format!("mass {m}, expected {want}")))
    });
    if p == 5 {
        if let Some(h) = h5_class_number(g) {
            suite.run("class-number", || Ok((set.h() == h, format!("h = {}, published {h}", set.h()))));
        }
    }

    let mut b: Option<BrandtMatrix> = None;
    suite.run("brandt", || {
        let m = brandt_matrix(&set, ell)?;
        let ok = m.integer_entries().is_some();
        b = Some(m);
        Ok((ok, "integral entries".into()))
    });
    let Some(b) = b else {
        return finish(cfg, ell, suite);
    };
    let bi = b.integer_entries().unwrap_or_default();

    suite.run("row-sums", || {
        let r = row_sum_check(&b);
        Ok((r.ok, format!("expected {}", r.expected)))
    });
    suite.run("weighted-symmetry", || Ok((b.is_weighted_symmetric(), "diag(e)^-1 B symmetric".into())));
    suite.run("neighbor-route", || {
        let nb = brandt_from_neighbors(&set, ell)?;
        Ok((nb.entries == b.entries, "neighbor counts equal hermitian counts".into()))
    });
    if g == 1 {
        suite.run("classical-oracle", || {
            for n in 1..=12 {
                let herm = if n == ell { b.clone() } else { brandt_matrix(&set, n)? };
                if compute_brandt(&set, n, Method::Ideals)?.entries != herm.entries {
                    return Ok((false, format!("ideal and hermitian B({n}) differ")));
                }
            }
            Ok((true, "B(n) agree for n <= 12".into()))
        });
    }
    if p == 5 {
        if let Some(reference) = h5_brandt(g, ell) {
            suite.run("published-table", || {
                let r = match_up_to_permutation(&bi, &reference);
                Ok((matches!(r, PermutationMatch::Direct(_)), format!("{r:?}")))
            });
        }
    }

    suite.run("big-graph", || {
        let big = build_big(&set, ell)?;
        Ok((ad_matches(&big.adjacency(), &bi) && big.is_connected(), "Ad = B, connected".into()))
    });
    let little = build_little(&set, ell).map_err(|e| e.to_string());
    suite.run("little-graph", || {
        let little = little.clone().map_err(|m| Failure::Computation { check: "consistency", message: m })?;
        little.check_axioms()?;
        let a = little.adjacency();
        let symmetric = (0..a.len()).all(|i| (0..a.len()).all(|j| a[i][j] == a[j][i]));
        let ok = little.weighted_adjacency() == b.entries && symmetric && little.is_connected();
        Ok((ok, format!("Adw = B, Ad symmetric, connected, {} half-edges", little.half_edges().len())))
    });
    suite.run("enhanced-graph", || {
        let little = little.clone().map_err(|m| Failure::Computation { check: "consistency", message: m })?;
        let enh = build_enhanced(&little)?;
        enh.check_structure()?;
        enh.verify_double_cover(&little)?;
        let a = little.adjacency();
        let h = a.len();
        let ae = enh.graph.adjacency();
        let block = (0..2 * h).all(|i| {
            (0..2 * h).all(|j| {
                let want = if (i < h) == (j < h) { 0 } else { a[i % h][j % h] };
                ae[i][j] == want
            })
        });
        Ok((block && enh.graph.is_connected(), "bipartite double cover, Ad = [[0,A],[A,0]], connected".into()))
    });
    suite.run("trivial-eigenvalue", || {
        let r = ramanujan_report(&bi, false)?;
        Ok((r.k as u64 == superspecial::brandt::expected_row_sum(ell, g), format!("k = {}, ramanujan = {}", r.k, r.ramanujan)))
    });
    suite.run("double-cover-spectrum", || {
        let little = little.clone().map_err(|m| Failure::Computation { check: "consistency", message: m })?;
        let enh = build_enhanced(&little)?;
        let cp = char_poly(&to_i64(little.adjacency()));
        let cpe = char_poly(&to_i64(enh.graph.adjacency()));
        let weighted = ramanujan_report(&integral(&enh.graph.weighted_adjacency())?, true)?;
        Ok((cpe == poly_mul(&cp, &negate_variable(&cp)), format!("bipartite ramanujan = {}", weighted.ramanujan)))
    });
    finish(cfg, ell, suite)
}

fn to_i64(m: Vec<Vec<u64>>) -> Vec<Vec<i64>> {
    m.into_iter().map(|r| r.into_iter().map(|x| x as i64).collect()).collect()
}

fn finish(cfg: &RunConfig, ell: u64, suite: Suite) -> Result<String, Failure> {
    let pass = suite.checks.iter().all(|c| c.pass);
    let checks: Vec<Value> = suite
        .checks
        .iter()
        .map(|c| json!({ "name": c.name, "pass": c.pass, "detail": c.detail }))
        .collect();
    let out = render(&json!({
        "p": cfg.p.to_string(),
        "g": cfg.g.to_string(),
        "ell": ell.to_string(),
        "checks": checks,
        "pass": pass,
    }));
    if pass {
        Ok(out)
    } else {
        let failed = suite.checks.iter().filter(|c| !c.pass).map(|c| c.name.to_string()).collect();
        Err(Failure::Checks { failed, output: out })
    }
}
