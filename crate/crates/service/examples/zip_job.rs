//! Convert a multi-file archive in memory and list the output archive.

use texmath::pipeline::{load_profile, ProfileOptions};
use texmath_service::zipjob::{build_archive, read_archive, run_job, ZipLimits};

fn main() {
    let main = b"\\documentclass{article}\n\\begin{document}\nSee $x^2$.\n\\input{sec/one}\n\\end{document}\n";
    let one = b"Then $\\frac{1}{n}$ and $a^$.\n";
    let zip = build_archive([("main.tex", &main[..]), ("sec/one.tex", &one[..])]);
    let profile = load_profile("standard", &ProfileOptions::new()).expect("profile");
    let job = run_job(&zip, &profile, ZipLimits::default()).expect("job");
    println!("main {}, status {}", job.manifest.main, job.manifest.status().name());
    for (name, bytes) in read_archive(&job.archive, ZipLimits::default()).expect("output archive") {
        println!("  {name} ({} bytes)", bytes.len());
    }

    let evil = build_archive([("main.tex", &b"x"[..]), ("../escape.tex", &b"y"[..])]);
    match run_job(&evil, &profile, ZipLimits::default()) {
        Err(e) => println!("rejected: {} [{}]", e, e.category()),
        Ok(_) => println!("accepted"),
    }
}
