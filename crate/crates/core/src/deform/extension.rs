use crate::error::{Error, Result};
use crate::fe_space::lagrange_1d;
use crate::mesh::Point;

/// Lenoir extension of an edge trace into the reference triangle.
///
/// `trace` holds the `k + 1` equispaced nodal values of a degree-`k`
/// polynomial on local edge `edge`, ordered from vertex `(edge + 1) % 3` to
/// vertex `(edge + 2) % 3`; both end values must vanish. With
/// `omega = 1 - lambda_edge` and `s = lambda_{edge+2} / omega` the extension is
///
/// `sum_{l=2}^{k} omega^l (Lambda_l w - Lambda_{l-1} w)(s)`
///
/// where `Lambda_l` is equispaced degree-`l` interpolation on the edge. It
/// reproduces the trace on `edge` and vanishes on the two other edges.
pub fn lenoir_extend_edge(trace: &[f64], edge: usize, ref_point: &Point) -> Result<f64> {
    let k = trace.len() - 1;
    let end = trace[0].abs().max(trace[k].abs());
    if end > 1e-13 {
        return Err(Error::NonZeroVertexTrace(end));
    }
    Ok(extend_unchecked(trace, edge, ref_point))
}

pub(crate) fn extend_unchecked(trace: &[f64], edge: usize, ref_point: &Point) -> f64 {
    let k = trace.len() - 1;
    if k < 2 {
        return 0.0;
    }
    let lambda = [1.0 - ref_point.x - ref_point.y, ref_point.x, ref_point.y];
    let omega = 1.0 - lambda[edge];
    if omega.abs() < 1e-300 {
        return 0.0;
    }
    let s = lambda[(edge + 2) % 3] / omega;
    // Lambda_1 w is the linear interpolant of the (zero) end values
    let mut previous = 0.0;
    let mut acc = 0.0;
    let mut omega_l = omega;
    for l in 2..=k {
        omega_l *= omega;
        let samples: Vec<f64> = (0..=l).map(|m| lagrange_1d(k, trace, m as f64 / l as f64)).collect();
        let current = lagrange_1d(l, &samples, s);
        acc += omega_l * (current - previous);
        previous = current;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    type Q = Ratio<i64>;

    fn lagrange_exact(values: &[Q], s: Q) -> Q {
        let n = values.len() - 1;
        let nodes: Vec<Q> = (0..=n).map(|m| Q::new(m as i64, n as i64)).collect();
        let mut acc = Q::from_integer(0);
        for i in 0..=n {
            let mut w = Q::from_integer(1);
            for j in 0..=n {
                if j != i {
                    w *= (s - nodes[j]) / (nodes[i] - nodes[j]);
                }
            }
            acc += w * values[i];
        }
        acc
    }

    #[test]
    fn bubble_at_centroid_matches_exact_arithmetic() {
        // w = lambda_1 lambda_2 on edge 0, i.e. s (1 - s) along the edge
        let trace = [0.0, 0.25, 0.0];
        let got = lenoir_extend_edge(&trace, 0, &Point::new(1.0 / 3.0, 1.0 / 3.0)).unwrap();

        let third = Q::new(1, 3);
        let omega = Q::from_integer(1) - third;
        let s = third / omega;
        let w_exact: Vec<Q> = [0, 1, 0].iter().map(|&n| Q::new(n, 4)).collect();
        let lambda2 = lagrange_exact(&w_exact, s);
        let lambda1 = lagrange_exact(&[Q::from_integer(0), Q::from_integer(0)], s);
        let expect = omega * omega * (lambda2 - lambda1);
        assert_eq!(expect, Q::new(1, 9));
        assert!((got - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn trace_and_other_edges() {
        for k in 2..=6 {
            for edge in 0..3 {
                let trace: Vec<f64> = (0..=k)
                    .map(|m| {
                        let s = m as f64 / k as f64;
                        s * (1.0 - s) * (1.3 - 2.0 * s + s.powi(3))
                    })
                    .collect();
                let trace = {
                    let mut t = trace;
                    t[0] = 0.0;
                    t[k] = 0.0;
                    t
                };
                let corner = |j: usize| match j {
                    0 => Point::new(0.0, 0.0),
                    1 => Point::new(1.0, 0.0),
                    _ => Point::new(0.0, 1.0),
                };
                let (a, b) = (corner((edge + 1) % 3), corner((edge + 2) % 3));
                let c = corner(edge);
                for i in 0..10 {
                    let s = (i as f64 + 0.5) / 10.0;
                    let on_edge = a + (b - a) * s;
                    let v = lenoir_extend_edge(&trace, edge, &on_edge).unwrap();
                    assert!((v - lagrange_1d(k, &trace, s)).abs() < 1e-13, "k={k} edge={edge}");
                    for other in [a + (c - a) * s, b + (c - b) * s] {
                        assert!(lenoir_extend_edge(&trace, edge, &other).unwrap().abs() < 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn linear_traces_extend_to_zero() {
        for k in 2..=6 {
            let trace = vec![0.0; k + 1];
            for p in [Point::new(0.2, 0.3), Point::new(0.6, 0.1)] {
                assert_eq!(lenoir_extend_edge(&trace, 1, &p).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn extension_is_a_polynomial_of_degree_k() {
        // sampling on the degree-k lattice and re-interpolating must reproduce
        // the extension everywhere
        use crate::fe_space::ReferenceElement;
        for k in 2..=6 {
            let re = ReferenceElement::new(k);
            let trace: Vec<f64> = (0..=k).map(|m| if m == 0 || m == k { 0.0 } else { (m * m) as f64 * 0.1 - 0.2 }).collect();
            let nodal: Vec<f64> = re.nodes().iter().map(|x| extend_unchecked(&trace, 2, x)).collect();
            for p in [Point::new(0.11, 0.23), Point::new(0.5, 0.4), Point::new(0.05, 0.9)] {
                let interp: f64 = re.values_at(&p).iter().zip(&nodal).map(|(a, b)| a * b).sum();
                assert!((interp - extend_unchecked(&trace, 2, &p)).abs() < 1e-12, "k={k}");
            }
        }
    }

    #[test]
    fn rejects_nonzero_vertex_values() {
        assert!(matches!(
            lenoir_extend_edge(&[1e-6, 0.3, 0.0], 0, &Point::new(0.2, 0.2)),
            Err(Error::NonZeroVertexTrace(_))
        ));
    }
}
