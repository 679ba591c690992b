//! Certified LP ratios over a small (alpha, n) table, cells run in parallel.

use rayon::prelude::*;

use intineq::lp_search::{search_ratio, GridSpec, SearchConfig};
use intineq::Params;

fn main() {
    let cfg = SearchConfig {
        tau: GridSpec {
            min: 1e-3,
            max: 1e3,
            points: 80,
        },
        t: GridSpec {
            min: 1e-4,
            max: 1e5,
            points: 160,
        },
        ..SearchConfig::default()
    };
    let cells: Vec<(f64, u32)> = [0.6, 1.0, 2.0]
        .iter()
        .flat_map(|&a| [2, 3].map(|n| (a, n)))
        .collect();
    let rows: Vec<String> = cells
        .par_iter()
        .map(|&(alpha, n)| {
            let p = Params::from_alpha(alpha, n).expect("valid cell");
            match search_ratio(&p, &cfg) {
                Ok(o) if o.is_certified() => {
                    format!("{alpha:>4} {n} {:.6} +- {:.1e}", o.ratio, o.ratio_error)
                }
                Ok(_) => format!("{alpha:>4} {n} not certified"),
                Err(e) => format!("{alpha:>4} {n} error: {e}"),
            }
        })
        .collect();
    println!("alpha n ratio");
    for r in rows {
        println!("{r}");
    }
}
