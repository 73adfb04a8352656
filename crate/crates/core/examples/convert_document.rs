//! Convert a document that pulls in another file, then print its log.

use std::collections::BTreeMap;

use texmath::pipeline::{convert_document, load_profile, log_to_json_lines, MapResolver, ProfileOptions};

const MAIN: &str = r"\documentclass{article}
\begin{document}
Let $f(x)=x^2$ and \(g = \frac{1}{2}\).
\input{parts/more}
Broken: $a^$.
\end{document}
";

fn main() {
    let files = BTreeMap::from([("parts/more.tex".to_string(), r"\[ \sum_{k=1}^n k = \frac{n(n+1)}{2} \]".to_string())]);
    let resolver = MapResolver::new(files);
    let profile = load_profile("standard", &ProfileOptions::new().with("title", "Demo")).expect("profile");
    let result = convert_document(MAIN, "main.tex", &profile, Some(&resolver));
    println!("status: {}", result.status.name());
    println!("{}", result.output);
    print!("{}", log_to_json_lines(&result.log, &result.version));
}
