//! Reference-element shape functions and the Gauss rule used by the assembler.
//!
//! Everything is expressed on the unit interval `xi in [0, 1]`; derivative
//! values are returned with respect to the physical coordinate of an element
//! of size `h`.

/// 4-point Gauss-Legendre rule on `[0, 1]` as `(xi, weight)` pairs.
///
/// Exact through polynomial degree 7, which covers every product assembled
/// here (the largest is the degree-6 integrand of the Hermite mass matrix).
pub const GAUSS: [(f64, f64); 4] = [
    (0.069_431_844_202_973_71, 0.173_927_422_568_726_93),
    (0.330_009_478_207_571_87, 0.326_072_577_431_273_05),
    (0.669_990_521_792_428_1, 0.326_072_577_431_273_05),
    (0.930_568_155_797_026_3, 0.173_927_422_568_726_93),
];

/// Cubic Hermite shape functions of one element, evaluated at `xi`.
///
/// Local ordering: value-left, slope-left, value-right, slope-right. Slope
/// functions carry the element size `h` so that the corresponding degrees of
/// freedom are physical slopes.
#[derive(Debug, Clone, Copy)]
pub struct Hermite {
    pub n: [f64; 4],
    /// First derivatives with respect to the physical coordinate.
    pub dn: [f64; 4],
    /// Second derivatives with respect to the physical coordinate.
    pub d2n: [f64; 4],
}

pub fn hermite(xi: f64, h: f64) -> Hermite {
    let x2 = xi * xi;
    let x3 = x2 * xi;
    let n = [
        1.0 - 3.0 * x2 + 2.0 * x3,
        h * (xi - 2.0 * x2 + x3),
        3.0 * x2 - 2.0 * x3,
        h * (x3 - x2),
    ];
    let dn_dxi = [
        -6.0 * xi + 6.0 * x2,
        h * (1.0 - 4.0 * xi + 3.0 * x2),
        6.0 * xi - 6.0 * x2,
        h * (3.0 * x2 - 2.0 * xi),
    ];
    let d2n_dxi = [
        -6.0 + 12.0 * xi,
        h * (-4.0 + 6.0 * xi),
        6.0 - 12.0 * xi,
        h * (6.0 * xi - 2.0),
    ];
    Hermite {
        n,
        dn: dn_dxi.map(|v| v / h),
        d2n: d2n_dxi.map(|v| v / (h * h)),
    }
}

/// Nodal Lagrange shape functions of one element (linear or quadratic).
///
/// Local ordering: left node, then midpoint for the quadratic case, then
/// right node. The linear case leaves the third slot zero.
#[derive(Debug, Clone, Copy)]
pub struct Lagrange {
    pub n: [f64; 3],
    pub dn: [f64; 3],
}

pub fn lagrange(order: usize, xi: f64, h: f64) -> Lagrange {
    match order {
        1 => Lagrange {
            n: [1.0 - xi, xi, 0.0],
            dn: [-1.0 / h, 1.0 / h, 0.0],
        },
        2 => Lagrange {
            n: [
                (2.0 * xi - 1.0) * (xi - 1.0),
                4.0 * xi * (1.0 - xi),
                xi * (2.0 * xi - 1.0),
            ],
            dn: [
                (4.0 * xi - 3.0) / h,
                (4.0 - 8.0 * xi) / h,
                (4.0 * xi - 1.0) / h,
            ],
        },
        _ => unreachable!("element order is validated at mesh construction"),
    }
}
