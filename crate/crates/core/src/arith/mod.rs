//! Number-theoretic substrate: sieving, modular arithmetic, integer
//! polynomials, cyclotomic polynomials and resultants.

mod cyclotomic;
mod modular;
mod poly;
mod primes;
mod resultant;

pub use cyclotomic::cyclotomic;
pub use modular::{
    frac_mod, gcd_u64, inverse_mod, is_prime_u64, mul_mod, pow_mod, poly_roots_mod,
    poly_roots_mod_gcd, poly_roots_mod_scan, RootMethod,
};
pub use poly::IntPolynomial;
pub use primes::{sieve, PrimeTable};
pub use resultant::{composite_poly, resultant, RingElement};
