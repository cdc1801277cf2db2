use nalgebra::Matrix6;
#[allow(unused_imports)]
use num_traits::Float;
use num_complex::Complex64;

/// Nuclear spin quantum number handled by this crate.
pub const SPIN: f64 = 2.5;
/// Hilbert-space dimension 2I + 1.
pub const DIM: usize = 6;

pub type Hermitian6 = Matrix6<Complex64>;

/// Angular-momentum matrices for I = 5/2 in the basis m = +5/2 … −5/2.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinOperators {
    pub ix: Hermitian6,
    pub iy: Hermitian6,
    pub iz: Hermitian6,
    /// `products[a][b] = I_a·I_b`
    pub products: [[Hermitian6; 3]; 3],
}

impl SpinOperators {
    pub fn components(&self) -> [&Hermitian6; 3] {
        [&self.ix, &self.iy, &self.iz]
    }

    /// Raising operator I₊ = Ix + i·Iy.
    pub fn raising(&self) -> Hermitian6 {
        self.ix + self.iy * Complex64::i()
    }

    /// Lowering operator I₋ = Ix − i·Iy.
    pub fn lowering(&self) -> Hermitian6 {
        self.ix - self.iy * Complex64::i()
    }
}

fn m_value(index: usize) -> f64 {
    SPIN - index as f64
}

/// Builds Ix, Iy, Iz from the ladder elements
/// ⟨m+1|I₊|m⟩ = √(I(I+1) − m(m+1)).
pub fn spin_operators() -> SpinOperators {
    let mut iz = Hermitian6::zeros();
    let mut raise = Hermitian6::zeros();
    for i in 0..DIM {
        let m = m_value(i);
        iz[(i, i)] = Complex64::new(m, 0.0);
        if i > 0 {
            // row i-1 holds m+1
            let amp = (SPIN * (SPIN + 1.0) - m * (m + 1.0)).sqrt();
            raise[(i - 1, i)] = Complex64::new(amp, 0.0);
        }
    }
    let lower = raise.adjoint();
    let ix = (raise + lower) * Complex64::new(0.5, 0.0);
    let iy = (raise - lower) * Complex64::new(0.0, -0.5);
    let comps = [ix, iy, iz];
    let products = core::array::from_fn(|a| core::array::from_fn(|b| comps[a] * comps[b]));
    SpinOperators {
        ix,
        iy,
        iz,
        products,
    }
}
