//! Sum-product (belief propagation) baseline: extrinsic messages, flooding
//! schedule, early exit on a satisfied syndrome.

use super::{check_rule, DecodeResult, LdpcCode, MSG_CAP};

fn hard(l: f64) -> u8 {
    u8::from(l < 0.0)
}

pub fn bp_decode(code: &LdpcCode, llrs: &[f64], max_iter: usize) -> DecodeResult {
    let n = code.n();
    assert_eq!(llrs.len(), n, "LLR word length must match the code");
    let mut v2c = vec![0.0; code.edges()];
    for v in 0..n {
        for &e in code.var_edges(v) {
            v2c[e] = llrs[v];
        }
    }
    let mut c2v = vec![0.0; code.edges()];
    let mut bits: Vec<u8> = llrs.iter().map(|&l| hard(l)).collect();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        for c in 0..code.m() {
            let r = code.check_edges(c);
            check_rule(&v2c[r.clone()], &mut c2v[r]);
        }
        for v in 0..n {
            let edges = code.var_edges(v);
            let total = llrs[v] + edges.iter().map(|&e| c2v[e]).sum::<f64>();
            for &e in edges {
                v2c[e] = (total - c2v[e]).clamp(-MSG_CAP * 4.0, MSG_CAP * 4.0);
            }
            bits[v] = hard(total);
        }
        if code.syndrome_ok(&bits) {
            converged = true;
            break;
        }
    }
    let syndrome_ok = code.syndrome_ok(&bits);
    DecodeResult {
        bits,
        iterations,
        syndrome_ok,
        converged,
    }
}
