#include "kansa/interpolation.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "kansa/errors.hpp"
#include "kansa/log.hpp"

namespace kansa {

Interpolant::Interpolant(KernelSpec kernel, std::shared_ptr<const SiteSet> sites,
                         PolynomialTail tail, Vector xi, Vector eta, std::optional<Domain> domain)
    : kernel_(kernel),
      sites_(std::move(sites)),
      tail_(std::move(tail)),
      xi_(std::move(xi)),
      eta_(std::move(eta)),
      domain_(std::move(domain)) {
  if (!sites_) throw InputError("interpolant needs a site set");
  if (xi_.size() != sites_->size()) throw InputError("xi length must equal the number of sites");
  if (eta_.size() != tail_.size()) throw InputError("eta length must equal the tail dimension");
  if (tail_.size() > 0 && tail_.dimension() != sites_->dimension()) {
    throw InputError("tail dimension does not match the sites");
  }
}

void Interpolant::check_point(const PointRef& x) const {
  if (x.size() != dimension()) {
    throw InputError("evaluation point has dimension " + std::to_string(x.size()) + ", expected " +
                     std::to_string(dimension()));
  }
  if (domain_ && !domain_->contains(x, 1e-9)) {
    std::ostringstream msg;
    msg << "interpolant evaluated outside " << domain_->describe() << " at x = ("
        << x.transpose() << ")";
    log_warn(msg.str());
  }
}

double Interpolant::evaluate(const PointRef& x) const {
  check_point(x);
  double sum = 0.0;
  const auto& p = sites_->points();
  for (Eigen::Index j = 0; j < p.rows(); ++j) {
    sum += xi_[j] * profile_in_squared_radius(kernel_, (x - p.row(j).transpose()).squaredNorm())[0];
  }
  if (tail_.size() > 0) sum += tail_.evaluate(x).dot(eta_);
  return sum;
}

double Interpolant::derivative(const MultiIndex& alpha, const PointRef& x) const {
  check_point(x);
  if (order(alpha) > 3) throw InputError("interpolant derivatives are available up to order 3");
  double sum = 0.0;
  const auto& p = sites_->points();
  for (Eigen::Index j = 0; j < p.rows(); ++j) {
    sum += xi_[j] * kernel_derivative(kernel_, alpha, x, p.row(j).transpose());
  }
  if (tail_.size() > 0) sum += tail_.derivative(alpha, x).dot(eta_);
  return sum;
}

Vector Interpolant::gradient(const PointRef& x) const {
  const int d = dimension();
  Vector g(d);
  MultiIndex alpha(static_cast<std::size_t>(d), 0);
  for (int i = 0; i < d; ++i) {
    alpha[static_cast<std::size_t>(i)] = 1;
    g[i] = derivative(alpha, x);
    alpha[static_cast<std::size_t>(i)] = 0;
  }
  return g;
}

Matrix Interpolant::hessian(const PointRef& x) const {
  const int d = dimension();
  Matrix h(d, d);
  for (int a = 0; a < d; ++a) {
    for (int b = a; b < d; ++b) {
      MultiIndex alpha(static_cast<std::size_t>(d), 0);
      ++alpha[static_cast<std::size_t>(a)];
      ++alpha[static_cast<std::size_t>(b)];
      h(a, b) = h(b, a) = derivative(alpha, x);
    }
  }
  return h;
}

double Interpolant::native_seminorm() const {
  const Matrix a = kernel_matrix(kernel_, *sites_);
  const double q = xi_.dot(a * xi_);
  if (q < -1e-10) {
    std::ostringstream msg;
    msg << "native seminorm radicand " << q << " is negative; moment condition broken";
    throw NumericalError(msg.str());
  }
  return std::sqrt(std::max(q, 0.0));
}

Matrix kernel_matrix(const KernelSpec& kernel, const SiteSet& sites) {
  const auto n = sites.size();
  const auto& p = sites.points();
  Matrix a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, i) = profile_in_squared_radius(kernel, 0.0)[0];
    for (Eigen::Index j = i + 1; j < n; ++j) {
      a(i, j) = a(j, i) = profile_in_squared_radius(kernel, (p.row(i) - p.row(j)).squaredNorm())[0];
    }
  }
  return a;
}

Matrix assemble_system(const KernelSpec& kernel, const SiteSet& sites, const PolynomialTail& tail) {
  kernel.validate();
  const auto n = sites.size();
  const auto q = tail.size();
  if (tail.m() < kernel.cpd_order) {
    throw InputError("tail order m=" + std::to_string(tail.m()) +
                     " is below the kernel's conditional positive definiteness order " +
                     std::to_string(kernel.cpd_order));
  }
  if (q > 0) {
    if (tail.dimension() != sites.dimension()) throw InputError("tail/site dimension mismatch");
    const auto report = unisolvency_check(sites, tail);
    if (report.status != Unisolvency::unisolvent) {
      throw InputError("sites are not unisolvent for polynomials of degree <= " +
                       std::to_string(tail.m() - 1) + " (rank " + std::to_string(report.rank) +
                       " < " + std::to_string(q) + ")");
    }
  }
  Matrix m = Matrix::Zero(n + q, n + q);
  m.topLeftCorner(n, n) = kernel_matrix(kernel, sites);
  if (q > 0) {
    const Matrix p = tail.collocation(sites.points());
    m.topRightCorner(n, q) = p;
    m.bottomLeftCorner(q, n) = p.transpose();
  }
  return m;
}

InterpolationSystem::InterpolationSystem(KernelSpec kernel, SiteSet sites, PolynomialTail tail,
                                         std::optional<Domain> domain, Factorization method)
    : InterpolationSystem(kernel, std::make_shared<const SiteSet>(std::move(sites)),
                          std::move(tail), std::move(domain), method) {}

InterpolationSystem::InterpolationSystem(KernelSpec kernel, std::shared_ptr<const SiteSet> sites,
                                         PolynomialTail tail, std::optional<Domain> domain,
                                         Factorization method)
    : kernel_(kernel), sites_(std::move(sites)), tail_(std::move(tail)), domain_(std::move(domain)) {
  if (!sites_) throw InputError("interpolation system needs a site set");
  if (tail_.m() == 0 && tail_.dimension() == 0) {
    // Default-constructed tail: give it the sites' dimension so metadata stays consistent.
    tail_ = PolynomialTail::for_box(0, sites_->bounding_lower(), sites_->bounding_upper());
  }
  matrix_ = assemble_system(kernel_, *sites_, tail_);
  factorize(method);
}

void InterpolationSystem::factorize(Factorization method) {
  const auto size = matrix_.rows();
  if (size <= kSvdConditionLimit) {
    Eigen::JacobiSVD<Matrix> svd(matrix_);
    const Vector& sv = svd.singularValues();
    const double smallest = sv[sv.size() - 1];
    condition_ = smallest > 0.0 ? sv[0] / smallest : std::numeric_limits<double>::infinity();
  }
  if (method == Factorization::automatic && tail_.size() == 0) {
    Eigen::LLT<Matrix> llt(matrix_);
    if (llt.info() == Eigen::Success) {
      solver_ = std::move(llt);
    } else {
      log_info("kernel matrix not numerically positive definite; falling back to LU");
      solver_ = Eigen::PartialPivLU<Matrix>(matrix_);
    }
  } else {
    solver_ = Eigen::PartialPivLU<Matrix>(matrix_);
  }
  if (size > kSvdConditionLimit) {
    const double rcond = std::visit([](const auto& f) { return f.rcond(); }, solver_);
    condition_ = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  }
  if (!(condition_ <= kMaxCondition)) {
    std::ostringstream msg;
    msg << std::scientific << std::setprecision(3) << "interpolation system is ill-conditioned (condition estimate "
        << condition_ << " > " << kMaxCondition << ")";
    throw IllConditionedError(msg.str(), condition_);
  }
}

Vector InterpolationSystem::solve(const Vector& values) const {
  const auto n = sites_->size();
  if (values.size() != n) {
    throw InputError("expected " + std::to_string(n) + " data values, got " +
                     std::to_string(values.size()));
  }
  Vector rhs = Vector::Zero(matrix_.rows());
  rhs.head(n) = values;
  return std::visit([&](const auto& s) -> Vector { return s.solve(rhs); }, solver_);
}

Interpolant InterpolationSystem::fit(const Vector& values) const {
  const Vector c = solve(values);
  const auto n = sites_->size();
  return Interpolant(kernel_, sites_, tail_, c.head(n), c.tail(c.size() - n), domain_);
}

Interpolant fit(const KernelSpec& kernel, const SiteSet& sites, const Vector& values,
                const PolynomialTail& tail) {
  return InterpolationSystem(kernel, sites, tail).fit(values);
}

double error_indicator(const Interpolant& f, double fill, int alpha_order) {
  const int nu = f.kernel().nu;
  if (alpha_order > nu || alpha_order < 0) {
    throw InputError("derivative order " + std::to_string(alpha_order) +
                     " exceeds the kernel smoothness nu=" + std::to_string(nu));
  }
  if (fill < 0.0) throw InputError("fill distance must be nonnegative");
  return std::pow(fill, nu - alpha_order) * f.native_seminorm();
}

SiteDifferentiation::SiteDifferentiation(const InterpolationSystem& system)
    : d_(system.sites().dimension()) {
  const auto& kernel = system.kernel();
  const auto& pts = system.sites().points();
  const auto& tail = system.tail();
  const auto n = pts.rows();
  const auto q = static_cast<Eigen::Index>(tail.size());
  const int d = d_;

  value_.resize(n, n + q);
  first_.assign(static_cast<std::size_t>(d), Matrix(n, n + q));
  second_.assign(static_cast<std::size_t>(d * (d + 1) / 2), Matrix(n, n + q));

  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto jet = kernel_jet(kernel, pts.row(i).transpose(), pts.row(j).transpose());
      value_(i, j) = jet.value;
      std::size_t s = 0;
      for (int a = 0; a < d; ++a) {
        first_[static_cast<std::size_t>(a)](i, j) = jet.gradient[a];
        for (int b = a; b < d; ++b) second_[s++](i, j) = jet.hessian(a, b);
      }
    }
    if (q > 0) {
      const auto x = pts.row(i).transpose();
      value_.block(i, n, 1, q) = tail.evaluate(x).transpose();
      std::size_t s = 0;
      for (int a = 0; a < d; ++a) {
        MultiIndex ea(static_cast<std::size_t>(d), 0);
        ea[static_cast<std::size_t>(a)] = 1;
        first_[static_cast<std::size_t>(a)].block(i, n, 1, q) = tail.derivative(ea, x).transpose();
        for (int b = a; b < d; ++b) {
          MultiIndex eab = ea;
          ++eab[static_cast<std::size_t>(b)];
          second_[s++].block(i, n, 1, q) = tail.derivative(eab, x).transpose();
        }
      }
    }
  }
}

SiteJets SiteDifferentiation::apply(const Interpolant& f) const {
  Vector c(f.xi().size() + f.eta().size());
  c << f.xi(), f.eta();
  if (c.size() != value_.cols()) throw InputError("interpolant does not match this system");
  SiteJets jets;
  const auto n = value_.rows();
  jets.values = value_ * c;
  jets.gradients.resize(n, d_);
  for (int a = 0; a < d_; ++a) jets.gradients.col(a) = first_[static_cast<std::size_t>(a)] * c;
  std::vector<Vector> second;
  second.reserve(second_.size());
  for (const auto& m : second_) second.push_back(m * c);
  jets.hessians.assign(static_cast<std::size_t>(n), Matrix(d_, d_));
  for (Eigen::Index i = 0; i < n; ++i) {
    std::size_t s = 0;
    auto& h = jets.hessians[static_cast<std::size_t>(i)];
    for (int a = 0; a < d_; ++a) {
      for (int b = a; b < d_; ++b, ++s) h(a, b) = h(b, a) = second[s][i];
    }
  }
  return jets;
}

namespace {

void write_vector(std::ostream& out, const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) out << (i ? " " : "") << v[i];
  out << '\n';
}

std::istringstream next_line(std::istream& in, const std::string& expected) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key != expected) throw InputError("interpolant dump: expected '" + expected + "', got '" + key + "'");
    return ls;
  }
  throw InputError("interpolant dump: unexpected end of input before '" + expected + "'");
}

Vector read_values(std::istream& in, Eigen::Index count) {
  Vector v(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    if (!(in >> v[i])) throw InputError("interpolant dump: truncated numeric block");
  }
  return v;
}

}  // namespace

void write_interpolant(std::ostream& out, const Interpolant& f) {
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << std::setprecision(17);
  const auto& k = f.kernel();
  const int d = f.dimension();
  out << "# kansa interpolant dump\n";
  out << "kernel " << to_string(k.family) << ' ' << k.alpha << ' ' << k.beta << ' ' << k.cpd_order
      << ' ' << k.nu << '\n';
  out << "dimension " << d << '\n';
  out << "tail " << f.tail().m() << ' ' << f.tail().size() << '\n';
  out << "center ";
  write_vector(out, f.tail().size() > 0 ? f.tail().center() : Vector::Zero(d));
  out << "scale ";
  write_vector(out, f.tail().size() > 0 ? f.tail().scale() : Vector::Ones(d));
  if (!f.domain()) {
    out << "domain none\n";
  } else if (f.domain()->is_rectangle()) {
    out << "domain rectangle ";
    Vector both(2 * d);
    both << f.domain()->rectangle().lower, f.domain()->rectangle().upper;
    write_vector(out, both);
  } else {
    out << "domain ball ";
    Vector both(d + 1);
    both << f.domain()->as_ball().center, f.domain()->as_ball().radius;
    write_vector(out, both);
  }
  out << "sites " << f.sites().size() << '\n';
  for (Eigen::Index j = 0; j < f.sites().size(); ++j) write_vector(out, f.sites().point(j));
  out << "xi\n";
  for (Eigen::Index j = 0; j < f.xi().size(); ++j) out << f.xi()[j] << '\n';
  out << "eta\n";
  for (Eigen::Index l = 0; l < f.eta().size(); ++l) out << f.eta()[l] << '\n';
  out.flags(flags);
  out.precision(prec);
}

Interpolant read_interpolant(std::istream& in) {
  KernelSpec k;
  {
    auto ls = next_line(in, "kernel");
    std::string family;
    ls >> family >> k.alpha >> k.beta >> k.cpd_order >> k.nu;
    if (!ls) throw InputError("interpolant dump: malformed kernel line");
    k.family = parse_kernel_family(family);
    k.validate();
  }
  int d = 0;
  next_line(in, "dimension") >> d;
  if (d < 1) throw InputError("interpolant dump: bad dimension");
  int m = 0, q = 0;
  next_line(in, "tail") >> m >> q;
  auto cs = next_line(in, "center");
  const Vector center = read_values(cs, d);
  auto ss = next_line(in, "scale");
  const Vector scale = read_values(ss, d);
  PolynomialTail tail(m, center, scale);
  if (tail.size() != q) throw InputError("interpolant dump: tail size mismatch");

  std::optional<Domain> domain;
  {
    auto ds = next_line(in, "domain");
    std::string shape;
    ds >> shape;
    if (shape == "rectangle") {
      const Vector both = read_values(ds, 2 * d);
      domain = Domain::box(both.head(d), both.tail(d));
    } else if (shape == "ball") {
      const Vector both = read_values(ds, d + 1);
      domain = Domain::ball(both.head(d), both[d]);
    } else if (shape != "none") {
      throw InputError("interpolant dump: unknown domain shape '" + shape + "'");
    }
  }
  Eigen::Index n = 0;
  next_line(in, "sites") >> n;
  if (n < 1) throw InputError("interpolant dump: bad site count");
  PointMatrix pts(n, d);
  for (Eigen::Index j = 0; j < n; ++j) pts.row(j) = read_values(in, d).transpose();
  next_line(in, "xi");
  Vector xi = read_values(in, n);
  next_line(in, "eta");
  Vector eta = read_values(in, q);
  return Interpolant(k, std::make_shared<const SiteSet>(std::move(pts)), std::move(tail),
                     std::move(xi), std::move(eta), std::move(domain));
}

}  // namespace kansa
