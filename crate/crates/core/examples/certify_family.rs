//! Runs the family certificate across a range of dimensions and prints one
//! line per result.

use nullitylab_core::algebra::Tolerances;
use nullitylab_core::examples::{family_certificate, ExampleSpec};
use nullitylab_core::holonomy::Certification;

fn main() {
    let tol = Tolerances::default();
    let cert_cfg = Certification::default();
    for d in 3..=12usize {
        let spec = ExampleSpec::default_family(d).unwrap();
        let started = std::time::Instant::now();
        match family_certificate(&spec, &tol, &cert_cfg) {
            Ok(cert) => {
                let status = if cert.passed() { "PASS" } else { "FAIL" };
                println!("d={d:2} {status} ({:.1?})", started.elapsed());
                for clause in cert.clauses.iter().filter(|c| !c.passed) {
                    println!(
                        "      failed: {} (residual {:e}, threshold {:e})",
                        clause.name, clause.residual, clause.threshold
                    );
                }
            }
            Err(e) => println!("d={d:2} ERROR: {e}"),
        }
    }
}
