//! Runs the acceptance criteria and prints one line per criterion. Pass a
//! seed and a case count to change the invariant harness.

use fusedfocus::acceptance::run_all;

fn main() {
    let mut args = std::env::args().skip(1);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);
    let cases = args.next().and_then(|s| s.parse().ok()).unwrap_or(200);
    for r in run_all(seed, cases) {
        println!("{r}");
    }
}
