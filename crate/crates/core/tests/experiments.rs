use std::collections::HashMap;

use vargrad_lab::harness::config::parse_config_str;
use vargrad_lab::harness::run;
use vargrad_lab::harness::table::CsvData;

fn data(src: &str) -> CsvData {
    let t = run(&parse_config_str(src).unwrap()).unwrap();
    CsvData::parse(std::str::from_utf8(&t.to_bytes()).unwrap()).unwrap()
}

#[test]
fn cv_comparison_ordering() {
    let d =
        data("experiment = \"cv-comparison\"\nseed = 21\ndims = [3, 30]\nsamples = [2, 8, 16]\nreplicates = 4000\n");
    let mut by_key: HashMap<(String, String, String, String), (f64, f64, f64, f64)> = HashMap::new();
    for r in &d.rows {
        let key = ["dim", "samples", "coordinate", "estimator"].map(|c| d.get(r, c).unwrap().to_string());
        let v = ["mean", "mean_se", "variance", "variance_se"].map(|c| d.real(r, c).unwrap());
        by_key.insert(key.into(), (v[0], v[1], v[2], v[3]));
    }
    let get = |dim: &str, s: &str, c: &str, e: &str| by_key[&(dim.into(), s.into(), c.into(), e.into())];

    for s in ["8", "16"] {
        for c in ["mean[0]", "mean[2]", "log_std[1]"] {
            let (vg, an) = (get("3", s, c, "vargrad").2, get("3", s, c, "cv-analytic").2);
            assert!(vg <= 2.0 * an, "D=3 S={s} {c}: {vg} vs {an}");
        }
    }
    for c in ["mean[0]", "log_std[7]"] {
        let (sampled, vg) = (get("30", "2", c, "cv-sampled").2, get("30", "2", c, "vargrad").2);
        assert!(sampled > vg, "{c}: {sampled} vs {vg}");
    }

    // replicate means agree pairwise within a joint 4-sigma interval
    for dim in ["3", "30"] {
        for s in ["2", "8", "16"] {
            for c in ["mean[1]", "log_std[0]"] {
                let ests = ["reinforce", "vargrad", "cv-analytic", "cv-sampled"].map(|e| get(dim, s, c, e));
                for a in 0..4 {
                    for b in a + 1..4 {
                        let (ma, sa) = (ests[a].0, ests[a].1);
                        let (mb, sb) = (ests[b].0, ests[b].1);
                        assert!(
                            (ma - mb).abs() < 4.0 * (sa * sa + sb * sb).sqrt(),
                            "D={dim} S={s} {c} {a} {b}"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn delta_ratio_matches_population_and_shrinks() {
    let d = data("experiment = \"delta-ratio\"\nseed = 22\ndims = [1, 3, 10, 30]\ndelta.samples = 20000\n");
    let mut prev = f64::INFINITY;
    for r in d.rows.iter().filter(|r| d.get(r, "coordinate") == Some("mean[0]")) {
        let (ratio, se, analytic) = (
            d.real(r, "ratio").unwrap(),
            d.real(r, "ratio_se").unwrap(),
            d.real(r, "ratio_analytic").unwrap(),
        );
        assert!((ratio - analytic).abs() < 4.0 * se, "{ratio} vs {analytic} (se {se})");
        assert!(analytic < prev);
        prev = analytic;
        if d.get(r, "dim") == Some("30") {
            assert!((analytic - 0.0272).abs() < 5e-5, "{analytic}");
        }
        assert_eq!(d.get(r, "bound_valid"), Some("0"));
    }
}

#[test]
fn delta_ratio_bound_column_when_tails_allow() {
    let d = data(
        "experiment = \"delta-ratio\"\nseed = 23\ndims = [1, 4]\ndelta.samples = 20000\n\
         gauss.mu = 0.5\ngauss.sigma2 = 0.5\ngauss.mu_tilde = 0.0\ngauss.sigma2_tilde = 1.0\n",
    );
    for r in &d.rows {
        assert_eq!(d.get(r, "bound_valid"), Some("1"));
        let (ratio, se, bound) = (
            d.real(r, "ratio").unwrap(),
            d.real(r, "ratio_se").unwrap(),
            d.real(r, "bound_rhs").unwrap(),
        );
        assert!(ratio.abs() <= bound + 4.0 * se);
    }
}
