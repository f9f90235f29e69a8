use std::ops::{Add, Mul, Neg, Sub};

/// The ground space an observable lives over: how to test membership, read a
/// simple function, integrate it against the intensity, and aggregate over a
/// configuration.
pub trait Space {
    type Point;
    type Region;
    type Function;
    type Config: ?Sized;

    fn region_contains(&self, region: &Self::Region, p: &Self::Point) -> bool;
    fn function_value(&self, f: &Self::Function, p: &Self::Point) -> f64;
    /// `∫ f dμ`.
    fn integral(&self, f: &Self::Function) -> f64;
    /// `ν(A)`.
    fn count(&self, region: &Self::Region, config: &Self::Config) -> f64;
    /// `Σ_{x ∈ ν} f(x)`.
    fn linear(&self, f: &Self::Function, config: &Self::Config) -> f64;
}

/// A polynomial functional of a counting measure.
#[derive(Clone, Debug, PartialEq)]
pub enum Observable<R, F> {
    Const(f64),
    /// `N(A)`.
    Count(R),
    /// `I¹(f) = ∫ f (dN - dμ)`.
    I1(F),
    Sum(Vec<Observable<R, F>>),
    Product(Vec<Observable<R, F>>),
    Scale(f64, Box<Observable<R, F>>),
}

impl<R: Clone, F: Clone> Observable<R, F> {
    pub fn count(region: R) -> Self {
        Observable::Count(region)
    }

    pub fn i1(f: F) -> Self {
        Observable::I1(f)
    }

    pub fn constant(c: f64) -> Self {
        Observable::Const(c)
    }

    /// Value at `ν + Σ_{y ∈ extra} δ_y`.
    pub fn eval<S>(&self, space: &S, config: &S::Config, extra: &[S::Point]) -> f64
    where
        S: Space<Region = R, Function = F>,
    {
        match self {
            Observable::Const(c) => *c,
            Observable::Count(r) => {
                space.count(r, config) + extra.iter().filter(|y| space.region_contains(r, y)).count() as f64
            }
            Observable::I1(f) => {
                let added: f64 = extra.iter().map(|y| space.function_value(f, y)).sum();
                space.linear(f, config) + added - space.integral(f)
            }
            Observable::Sum(xs) => xs.iter().map(|x| x.eval(space, config, extra)).sum(),
            Observable::Product(xs) => xs.iter().map(|x| x.eval(space, config, extra)).product(),
            Observable::Scale(c, x) => c * x.eval(space, config, extra),
        }
    }

    /// `D¹_y F`, built with exact rules and normalized.
    ///
    /// `D N(A) = 1_A(y)`, `D I¹(f) = f(y)`, and for products
    /// `D(FG) = (DF)G + F(DG) + (DF)(DG)`.
    pub fn diff1<S>(&self, space: &S, y: &S::Point) -> Self
    where
        S: Space<Region = R, Function = F>,
    {
        self.diff1_raw(space, y).normalize()
    }

    fn diff1_raw<S>(&self, space: &S, y: &S::Point) -> Self
    where
        S: Space<Region = R, Function = F>,
    {
        match self {
            Observable::Const(_) => Observable::Const(0.0),
            Observable::Count(r) => Observable::Const(if space.region_contains(r, y) { 1.0 } else { 0.0 }),
            Observable::I1(f) => Observable::Const(space.function_value(f, y)),
            Observable::Sum(xs) => Observable::Sum(xs.iter().map(|x| x.diff1_raw(space, y)).collect()),
            Observable::Scale(c, x) => Observable::Scale(*c, Box::new(x.diff1_raw(space, y))),
            Observable::Product(xs) => match xs.split_first() {
                None => Observable::Const(0.0),
                Some((first, [])) => first.diff1_raw(space, y),
                Some((first, rest)) => {
                    let rest = Observable::Product(rest.to_vec());
                    let d_first = first.diff1_raw(space, y);
                    let d_rest = rest.diff1_raw(space, y);
                    Observable::Sum(vec![
                        Observable::Product(vec![d_first.clone(), rest.clone()]),
                        Observable::Product(vec![first.clone(), d_rest.clone()]),
                        Observable::Product(vec![d_first, d_rest]),
                    ])
                }
            },
        }
    }

    /// `D^n_{y_1…y_n} F = D^{n-1}_{y_2…y_n}(D¹_{y_1} F)`; the identity for no points.
    pub fn diffn<S>(&self, space: &S, ys: &[S::Point]) -> Self
    where
        S: Space<Region = R, Function = F>,
    {
        ys.iter().fold(self.clone().normalize(), |acc, y| acc.diff1(space, y))
    }

    /// Flattens sums and products, folds constants and drops zero terms.
    pub fn normalize(self) -> Self {
        match self {
            Observable::Scale(c, x) => scale(c, x.normalize()),
            Observable::Sum(xs) => {
                let mut constant = 0.0;
                let mut terms = Vec::new();
                for x in xs.into_iter().map(Observable::normalize) {
                    match x {
                        Observable::Const(c) => constant += c,
                        Observable::Sum(inner) => {
                            for t in inner {
                                match t {
                                    Observable::Const(c) => constant += c,
                                    t => terms.push(t),
                                }
                            }
                        }
                        t => terms.push(t),
                    }
                }
                if constant != 0.0 {
                    terms.push(Observable::Const(constant));
                }
                match terms.len() {
                    0 => Observable::Const(0.0),
                    1 => terms.pop().expect("one term"),
                    _ => Observable::Sum(terms),
                }
            }
            Observable::Product(xs) => {
                let mut coeff = 1.0;
                let mut factors = Vec::new();
                let mut push = |x: Observable<R, F>, coeff: &mut f64| match x {
                    Observable::Const(c) => *coeff *= c,
                    Observable::Scale(c, inner) => {
                        *coeff *= c;
                        factors.push(*inner);
                    }
                    t => factors.push(t),
                };
                for x in xs.into_iter().map(Observable::normalize) {
                    match x {
                        Observable::Product(inner) => {
                            for t in inner {
                                push(t, &mut coeff);
                            }
                        }
                        t => push(t, &mut coeff),
                    }
                }
                if coeff == 0.0 {
                    return Observable::Const(0.0);
                }
                let body = match factors.len() {
                    0 => return Observable::Const(coeff),
                    1 => factors.pop().expect("one factor"),
                    _ => Observable::Product(factors),
                };
                scale(coeff, body)
            }
            x => x,
        }
    }

    /// Polynomial degree in the counts.
    pub fn degree(&self) -> usize {
        match self {
            Observable::Const(_) => 0,
            Observable::Count(_) | Observable::I1(_) => 1,
            Observable::Sum(xs) => xs.iter().map(Observable::degree).max().unwrap_or(0),
            Observable::Product(xs) => xs.iter().map(Observable::degree).sum(),
            Observable::Scale(_, x) => x.degree(),
        }
    }
}

fn scale<R, F>(c: f64, x: Observable<R, F>) -> Observable<R, F> {
    match x {
        _ if c == 0.0 => Observable::Const(0.0),
        Observable::Const(v) => Observable::Const(c * v),
        Observable::Scale(d, inner) => scale(c * d, *inner),
        x if c == 1.0 => x,
        x => Observable::Scale(c, Box::new(x)),
    }
}

impl<R, F> Add for Observable<R, F> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Observable::Sum(vec![self, rhs])
    }
}

impl<R, F> Sub for Observable<R, F> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Observable::Sum(vec![self, Observable::Scale(-1.0, Box::new(rhs))])
    }
}

impl<R, F> Mul for Observable<R, F> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Observable::Product(vec![self, rhs])
    }
}

impl<R, F> Neg for Observable<R, F> {
    type Output = Self;
    fn neg(self) -> Self {
        Observable::Scale(-1.0, Box::new(self))
    }
}

impl<R, F> Mul<Observable<R, F>> for f64 {
    type Output = Observable<R, F>;
    fn mul(self, rhs: Observable<R, F>) -> Observable<R, F> {
        Observable::Scale(self, Box::new(rhs))
    }
}
