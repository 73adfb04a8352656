//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Thresholds are pinned here.

#[path = "../../core/tests/support/mod.rs"]
mod support;
mod common;

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use base64::Engine;
use serde_json::{json, Value};
use texmath::earley::{parse, GrammarBuilder};
use texmath::lexicon::{map_unicode, Glyph, MathStyle};
use texmath::pipeline::{convert, load_profile, ProfileOptions};
use texmath_service::cli::{run, Io};
use texmath_service::config::ServiceConfig;
use texmath_service::envelope::ConvertResponse;
use texmath_service::zipjob::build_archive;

use support::earley::run_suite;
use support::fixtures;

const ORACLE_GRAMMARS: usize = 200;
const ORACLE_LIMIT: Duration = Duration::from_secs(60);
const RECURSION_LENGTH: usize = 10_000;
const RECURSION_LIMIT: Duration = Duration::from_secs(5);
const CORPUS_SIZE: usize = 500;
const SMP_COMBINATIONS: usize = 52 * 4;
const TEXVC_MINIMUM: usize = 150;
const LOCATOR_FIXTURES: usize = 30;
const VALID_REQUESTS: usize = 100;
const POISON_REQUESTS: usize = 20;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn failures(what: &str, list: Vec<String>) -> Outcome {
    if list.is_empty() {
        Ok(what.to_string())
    } else {
        let shown: Vec<_> = list.iter().take(5).cloned().collect();
        Err(format!("{what}; {} failures, first: {}", list.len(), shown.join(" | ")))
    }
}

fn parser_oracle() -> Outcome {
    let t0 = Instant::now();
    let stats = run_suite(0x5eed_e41e, ORACLE_GRAMMARS);
    let elapsed = t0.elapsed();
    let what = format!("{} grammars, {} inputs, {} mismatches, {elapsed:.1?}", stats.grammars, stats.inputs, stats.mismatches.len());
    if stats.grammars != ORACLE_GRAMMARS || elapsed > ORACLE_LIMIT {
        return Err(what);
    }
    failures(&what, stats.mismatches)
}

fn catalan() -> Outcome {
    failures("n = 2..7 against binomial Catalan numbers", fixtures::check_catalan(2..=7))
}

fn right_recursion() -> Outcome {
    let job = || {
        let mut b = GrammarBuilder::new();
        let s = b.nonterminal("S");
        let a = b.terminal("a");
        b.rule(s, vec![a, s], "");
        b.rule(s, vec![a], "");
        let g = b.build("S").map_err(|e| e.to_string())?;
        let input = vec![0u32; RECURSION_LENGTH];
        let t0 = Instant::now();
        let (chart, forest) = parse(&g, input.as_slice());
        let tree = forest.tree(0);
        let elapsed = t0.elapsed();
        let what = format!("{RECURSION_LENGTH} tokens in {elapsed:.2?}, {} tree(s)", forest.tree_count());
        let ok = chart.accepted() && forest.tree_count() == 1 && tree.as_ref().map(|t| t.span()) == Some((0, RECURSION_LENGTH as u32));
        std::mem::forget(tree);
        if ok && elapsed < RECURSION_LIMIT {
            Ok(what)
        } else {
            Err(what)
        }
    };
    std::thread::Builder::new().stack_size(64 << 20).spawn(job).map_err(|e| e.to_string())?.join().map_err(|_| "panicked".to_string())?
}

fn bijection() -> Outcome {
    let n = fixtures::corpus().len();
    if n != CORPUS_SIZE {
        return Err(format!("corpus holds {n} formulas"));
    }
    failures(&format!("{n} formulas"), fixtures::check_corpus_bijection())
}

fn mfenced() -> Outcome {
    let (n, list) = fixtures::check_mfenced_absence();
    failures(&format!("{n} outputs"), list)
}

fn smp_table() -> Outcome {
    let table: HashMap<(MathStyle, char), char> = include_str!("../../core/data/smp_table.tsv")
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            let cp = u32::from_str_radix(f[2].trim_start_matches("U+"), 16).expect("codepoint");
            ((f[0].parse::<MathStyle>().expect("style"), f[1].chars().next().expect("base")), char::from_u32(cp).expect("char"))
        })
        .collect();
    let mut checked = 0;
    let mut bad = Vec::new();
    for style in [MathStyle::Bold, MathStyle::Italic, MathStyle::BoldItalic, MathStyle::DoubleStruck] {
        for ch in ('A'..='Z').chain('a'..='z') {
            checked += 1;
            let want = table.get(&(style, ch)).copied();
            let got = map_unicode(ch, style);
            if want.is_none() || got.as_ref().ok() != want.map(Glyph::Char).as_ref() {
                bad.push(format!("{style} {ch}: table {want:?}, mapped {got:?}"));
            }
        }
    }
    if checked != SMP_COMBINATIONS {
        return Err(format!("checked {checked}"));
    }
    failures(&format!("{checked} letter/style pairs"), bad)
}

fn texvc() -> Outcome {
    let (n, list) = fixtures::check_texvc();
    if n < TEXVC_MINIMUM {
        return Err(format!("only {n} formulas"));
    }
    failures(&format!("{n} formulas"), list)
}

fn locators() -> Outcome {
    let (n, list) = fixtures::check_locators();
    if n != LOCATOR_FIXTURES {
        return Err(format!("{n} fixtures"));
    }
    failures(&format!("{n} fixtures"), list)
}

enum Body {
    Json(String),
    Raw(&'static str, Vec<u8>),
}

fn poison() -> Vec<(&'static str, Body)> {
    let b64 = |bytes: &[u8]| base64::engine::general_purpose::STANDARD.encode(bytes);
    let src = |s: String| Body::Json(json!({ "source": s }).to_string());
    vec![
        ("malformed json", Body::Json("{\"source\": ".into())),
        ("empty body", Body::Raw("application/json", Vec::new())),
        ("no input", Body::Json(json!({ "id": 1 }).to_string())),
        ("source and archive", Body::Json(json!({ "source": "x", "archive": b64(b"zip") }).to_string())),
        ("unknown profile", Body::Json(json!({ "source": "x", "profile": "nope" }).to_string())),
        ("server file option", Body::Json(json!({ "source": "x", "options": { "preload": "/etc/passwd" } }).to_string())),
        ("bad base64", Body::Json(json!({ "archive": "***" }).to_string())),
        ("corrupt archive", Body::Json(json!({ "archive": b64(b"PK\x03\x04 not a zip") }).to_string())),
        ("oversized body", Body::Raw("application/json", vec![b' '; 11 << 20])),
        ("binary garbage", Body::Raw("application/octet-stream", (0..=255u8).cycle().take(4096).collect())),
        ("self-recursive macro", src(r"\def\a{\a}\a".into())),
        ("exponential macro", src(r"\def\a{\a\a}\a".into())),
        ("unclosed braces", src("{".repeat(5000))),
        ("nested fractions", src(r"\frac{".repeat(3000))),
        ("long sum", src(format!("{}a", "a+".repeat(20_000)))),
        ("control characters", src("x\u{0}y\u{7}\u{1b}z".into())),
        ("lone backslashes", src("\\".repeat(1000))),
        ("stacked scripts", src(format!("x{}", "^".repeat(3000)))),
        ("unmatched left", src(r"\left(".repeat(2000))),
        ("deep groups", src(format!("{}x{}", "{".repeat(3000), "}".repeat(3000)))),
    ]
}

const TRAVERSALS: [&str; 6] = ["../evil.tex", "a/../../evil.tex", "/etc/evil.tex", "..\\evil.tex", "a/../b.tex", "./x/../../y.tex"];

fn service_robustness() -> Outcome {
    let addr = common::start_batch_blocking(ServiceConfig { workers: 4, ..common::small_config() });
    let base = format!("http://{addr}");
    let http = reqwest::blocking::Client::builder().timeout(Duration::from_secs(300)).build().map_err(|e| e.to_string())?;
    let profile = load_profile("math", &ProfileOptions::new()).map_err(|e| e.to_string())?;
    let valid: Vec<String> = fixtures::corpus().into_iter().take(VALID_REQUESTS).map(str::to_string).collect();
    let poison = poison();
    assert_eq!(poison.len(), POISON_REQUESTS);

    let mut problems = Vec::new();
    let (http_ref, base_ref, profile_ref) = (&http, &base, &profile);
    std::thread::scope(|s| {
        let mut handles = Vec::new();
        for (i, f) in valid.iter().enumerate() {
            let (http, base, profile) = (http_ref, base_ref, profile_ref);
            handles.push(s.spawn(move || -> Result<(), String> {
                let resp = http.post(format!("{base}/convert")).json(&json!({ "id": i, "source": f })).send().map_err(|e| format!("valid {i}: {e}"))?;
                if resp.status() != 200 {
                    return Err(format!("valid {i}: HTTP {}", resp.status()));
                }
                let r: ConvertResponse = resp.json().map_err(|e| format!("valid {i}: {e}"))?;
                if r.result != convert(f, profile).output {
                    return Err(format!("valid {i}: result differs from local conversion"));
                }
                Ok(())
            }));
            if i % 5 == 0 {
                if let Some((name, body)) = poison.get(i / 5) {
                    handles.push(s.spawn(move || -> Result<(), String> {
                        let req = http.post(format!("{base}/convert"));
                        let req = match body {
                            Body::Json(text) => req.header("content-type", "application/json").body(text.clone()),
                            Body::Raw(ct, bytes) => req.header("content-type", *ct).body(bytes.clone()),
                        };
                        let resp = req.send().map_err(|e| format!("poison {name}: {e}"))?;
                        let code = resp.status().as_u16();
                        if code >= 500 {
                            return Err(format!("poison {name}: HTTP {code}"));
                        }
                        if code != 413 {
                            let r: Value = resp.json().map_err(|e| format!("poison {name}: no envelope: {e}"))?;
                            if code >= 400 && r["error"]["category"].as_str().is_none() {
                                return Err(format!("poison {name}: {code} without error category"));
                            }
                        }
                        Ok(())
                    }));
                }
            }
        }
        for h in handles {
            match h.join() {
                Ok(Ok(())) => {}
                Ok(Err(e)) => problems.push(e),
                Err(_) => problems.push("client thread panicked".into()),
            }
        }
    });

    let mut rejected = 0;
    for bad in TRAVERSALS {
        let zip = build_archive([("main.tex", &b"x"[..]), (bad, &b"pwned"[..])]);
        let as_json = http.post(format!("{base}/convert")).json(&json!({ "archive": base64::engine::general_purpose::STANDARD.encode(&zip) })).send();
        let as_job = http.post(format!("{base}/job")).body(zip).send();
        for resp in [as_json, as_job] {
            let resp = resp.map_err(|e| e.to_string())?;
            let code = resp.status().as_u16();
            let r: Value = resp.json().unwrap_or(Value::Null);
            if code == 400 && r["error"]["category"] == "unsafe-path" {
                rejected += 1;
            } else {
                problems.push(format!("traversal {bad}: HTTP {code} {}", r["error"]));
            }
        }
    }

    let health: Value = http.get(format!("{base}/health")).send().and_then(|r| r.json()).map_err(|e| format!("health after load: {e}"))?;
    if health["status"] != "ok" {
        problems.push(format!("health after load: {health}"));
    }
    let what = format!(
        "{VALID_REQUESTS} valid + {POISON_REQUESTS} poison, server healthy, {rejected}/{} traversal archives rejected",
        TRAVERSALS.len() * 2
    );
    failures(&what, problems)
}

fn cli(args: &[&str]) -> (i32, Vec<u8>, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("texmath").chain(args.iter().copied());
    let code = run(argv, &mut Io { stdin: &mut &b""[..], stdout: &mut out, stderr: &mut err });
    (code, out, String::from_utf8_lossy(&err).into_owned())
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let conf = dir.path().join("empty.conf");
    std::fs::write(&conf, "").map_err(|e| e.to_string())?;
    let conf = conf.display().to_string();
    let formulas = fixtures::all_formulas();
    let mut files = Vec::new();
    for (i, f) in formulas.iter().enumerate() {
        let p = dir.path().join(format!("f{i:04}.tex"));
        std::fs::write(&p, f).map_err(|e| e.to_string())?;
        files.push(p.display().to_string());
    }
    let addr = common::start_batch_blocking(common::small_config());
    let server = format!("http://{addr}");
    let mut mismatched = Vec::new();
    for (i, chunk) in files.chunks(100).enumerate() {
        let mut args = vec!["convert", "--config", conf.as_str()];
        args.extend(chunk.iter().map(String::as_str));
        let local = cli(&args);
        args.extend(["--server", server.as_str()]);
        let remote = cli(&args);
        if local.0 != remote.0 || local.1 != remote.1 {
            mismatched.push(format!("chunk {i}: exit {} vs {}, {}", local.0, remote.0, remote.2.lines().next().unwrap_or("")));
        }
    }
    failures(&format!("{} fixture formulas", formulas.len()), mismatched)
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("parser-oracle", parser_oracle),
        ("catalan-counts", catalan),
        ("right-recursion", right_recursion),
        ("parallel-markup-bijection", bijection),
        ("mfenced-absence", mfenced),
        ("smp-table", smp_table),
        ("texvc-subset", texvc),
        ("locators", locators),
        ("service-robustness", service_robustness),
        ("local-remote-determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.into_iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("PASS  {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
