//! Builtin profiles, overrides and the output formats they select.

use texmath::pipeline::{convert, load_profile, ProfileOptions, BUILTIN_PROFILES};

fn main() {
    println!("builtin: {}", BUILTIN_PROFILES.join(", "));
    let source = r"x^2+\alpha";
    for format in ["mathml-presentation", "mathml-content"] {
        let profile = load_profile("math", &ProfileOptions::new().with("format", format)).expect("profile");
        println!("{format}:\n{}\n", convert(source, &profile).output);
    }
    let fragment = load_profile("fragment", &ProfileOptions::new()).expect("profile");
    println!("{}", convert("Euler: $e^{i\\pi}+1=0$.", &fragment).output);
    match load_profile("math", &ProfileOptions::new().with("cap", "many")) {
        Ok(_) => println!("accepted"),
        Err(e) => println!("rejected: {e}"),
    }
}
