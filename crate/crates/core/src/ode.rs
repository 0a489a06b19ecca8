//! Classical fixed-step fourth-order Runge-Kutta for autonomous systems.

/// Reusable stage buffers for [`Rk4::step`].
#[derive(Clone, Debug)]
pub struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

/// Largest `|h lambda|` on the negative real axis inside the RK4 stability region.
pub const REAL_AXIS_LIMIT: f64 = 2.785;

impl Rk4 {
    pub fn new(dim: usize) -> Self {
        Self {
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            tmp: vec![0.0; dim],
        }
    }

    /// Advances `y` by `dt` under `y' = f(y)`; `f` writes the derivative
    /// into its second argument.
    pub fn step<E, F>(&mut self, mut f: F, y: &mut [f64], dt: f64) -> Result<(), E>
    where
        F: FnMut(&[f64], &mut [f64]) -> Result<(), E>,
    {
        let n = y.len();
        debug_assert_eq!(n, self.k1.len());

        f(y, &mut self.k1)?;
        for i in 0..n {
            self.tmp[i] = y[i] + 0.5 * dt * self.k1[i];
        }
        f(&self.tmp, &mut self.k2)?;
        for i in 0..n {
            self.tmp[i] = y[i] + 0.5 * dt * self.k2[i];
        }
        f(&self.tmp, &mut self.k3)?;
        for i in 0..n {
            self.tmp[i] = y[i] + dt * self.k3[i];
        }
        f(&self.tmp, &mut self.k4)?;
        for i in 0..n {
            y[i] += dt / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
        Ok(())
    }
}
