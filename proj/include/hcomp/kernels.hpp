#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "hcomp/dirichlet.hpp"
#include "hcomp/error.hpp"
#include "hcomp/numtheory.hpp"
#include "hcomp/symbols.hpp"

namespace hcomp {

// K_w(s) = zeta(conj(w) + s), Re w > 1/2
struct FullKernel {
    cplx w;
    friend bool operator==(const FullKernel&, const FullKernel&) = default;
};
// Partial kernel over the first d primes, Re w > 0
struct PartialDKernel {
    int d = 1;
    cplx w;
    friend bool operator==(const PartialDKernel&, const PartialDKernel&) = default;
};
// prod_{p in Q} 1/(1 - p^{-(conj(w)+s)}), Re w > 0
struct PartialQKernel {
    std::vector<u64> primes;
    cplx w;
    friend bool operator==(const PartialQKernel&, const PartialQKernel&) = default;
};
// 1/(1 - q^{-conj(w)} q^{-s}), Re w > 0
struct SinglePrimeKernel {
    u64 q = 2;
    cplx w;
    friend bool operator==(const SinglePrimeKernel&, const SinglePrimeKernel&) = default;
};

using KernelSpec = std::variant<FullKernel, PartialDKernel, PartialQKernel, SinglePrimeKernel>;

inline constexpr double kZetaGuard = 1e-6;

// Euler-Maclaurin with n0 = 50 and Bernoulli corrections through B_8.
inline cplx zeta(cplx s) {
    if (!(s.real() > 1.0 + kZetaGuard))
        throw DomainError("zeta: Re s must exceed 1 + 1e-6, got " + std::to_string(s.real()));
    constexpr int N = 50;
    cplx sum{};
    for (int n = N - 1; n >= 1; --n) sum += std::exp(-s * std::log(static_cast<double>(n)));
    const double logN = std::log(static_cast<double>(N));
    const cplx Ns = std::exp(-s * logN);  // N^{-s}
    sum += static_cast<double>(N) * Ns / (s - 1.0) + 0.5 * Ns;
    // B_{2k} / (2k)!
    constexpr std::array<double, 4> b = {1.0 / 12.0, -1.0 / 720.0, 1.0 / 30240.0, -1.0 / 1209600.0};
    cplx rising = s;           // s (s+1) ... (s+2k-2)
    cplx Npow = Ns / double(N);  // N^{-s-2k+1}
    for (int k = 1; k <= 4; ++k) {
        sum += b[static_cast<std::size_t>(k - 1)] * rising * Npow;
        rising *= (s + double(2 * k - 1)) * (s + double(2 * k));
        Npow /= double(N) * double(N);
    }
    return sum;
}

namespace detail {

// e^z - 1 without cancellation for small |z|.
inline cplx expm1(cplx z) {
    const double a = z.real(), b = z.imag();
    const double sh = std::sin(0.5 * b);
    return {std::expm1(a) * std::cos(b) - 2.0 * sh * sh, std::exp(a) * std::sin(b)};
}

// 1 / (1 - p^{-z})
inline cplx geometric_factor(u64 p, cplx z) {
    return -1.0 / expm1(-z * std::log(static_cast<double>(p)));
}

inline std::vector<u64> kernel_primes(const KernelSpec& spec) {
    if (auto* k = std::get_if<PartialDKernel>(&spec)) return first_primes(static_cast<std::size_t>(k->d));
    if (auto* k = std::get_if<PartialQKernel>(&spec)) return k->primes;
    return {};
}

inline cplx kernel_parameter(const KernelSpec& spec) {
    return std::visit([](const auto& k) { return k.w; }, spec);
}

}  // namespace detail

inline void validate(const KernelSpec& spec) {
    if (auto* k = std::get_if<FullKernel>(&spec)) {
        if (!(k->w.real() > 0.5)) throw DomainError("Full kernel requires Re w > 1/2");
        return;
    }
    if (auto* k = std::get_if<PartialDKernel>(&spec)) {
        if (k->d < 1) throw DomainError("PartialD kernel requires d >= 1");
    }
    if (auto* k = std::get_if<PartialQKernel>(&spec)) {
        if (k->primes.empty()) throw DomainError("PartialQ kernel requires a nonempty prime set");
        for (u64 p : k->primes)
            if (!is_prime(p)) throw DomainError("PartialQ kernel requires primes");
    }
    if (auto* k = std::get_if<SinglePrimeKernel>(&spec)) {
        if (k->q < 2) throw DomainError("SinglePrime kernel requires q >= 2");
    }
    if (!(detail::kernel_parameter(spec).real() > 0.0)) throw DomainError("partial kernels require Re w > 0");
}

inline double kernel_norm_sq(const KernelSpec& spec) {
    validate(spec);
    if (auto* k = std::get_if<FullKernel>(&spec)) return zeta(cplx(2.0 * k->w.real(), 0.0)).real();
    if (auto* k = std::get_if<SinglePrimeKernel>(&spec)) return detail::geometric_factor(k->q, 2.0 * k->w.real()).real();
    const double x = 2.0 * detail::kernel_parameter(spec).real();
    double prod = 1.0;
    for (u64 p : detail::kernel_primes(spec)) prod *= detail::geometric_factor(p, x).real();
    return prod;
}

// <K_A, K_B>, linear in the first slot: sum over the common support of n^{-conj(a)} n^{-b}.
inline cplx kernel_inner(const KernelSpec& A, const KernelSpec& B) {
    validate(A);
    validate(B);
    const cplx z = std::conj(detail::kernel_parameter(A)) + detail::kernel_parameter(B);
    if (std::holds_alternative<FullKernel>(A) && std::holds_alternative<FullKernel>(B)) return zeta(z);
    if (auto* a = std::get_if<SinglePrimeKernel>(&A)) {
        auto* b = std::get_if<SinglePrimeKernel>(&B);
        if (b == nullptr || b->q != a->q) throw UnsupportedError("kernel_inner: kernel families differ");
        return detail::geometric_factor(a->q, z);
    }
    const bool partialA = std::holds_alternative<PartialDKernel>(A) || std::holds_alternative<PartialQKernel>(A);
    const bool partialB = std::holds_alternative<PartialDKernel>(B) || std::holds_alternative<PartialQKernel>(B);
    if (!partialA || !partialB) throw UnsupportedError("kernel_inner: kernel families differ");
    const auto pa = detail::kernel_primes(A), pb = detail::kernel_primes(B);
    if (pa != pb) throw UnsupportedError("kernel_inner: partial kernels over different prime sets");
    if (!(z.real() > 0.0)) throw DomainError("kernel_inner: Re(conj(a) + b) must be positive");
    cplx prod = 1.0;
    for (u64 p : pa) prod *= detail::geometric_factor(p, z);
    return prod;
}

// <f, K> = sum over the kernel's support of a_n n^{-w}: the reproducing property for that family.
inline cplx kernel_pairing(const DirichletPolynomial& f, const KernelSpec& spec) {
    validate(spec);
    const cplx w = detail::kernel_parameter(spec);
    const auto primes = detail::kernel_primes(spec);
    cplx total{};
    for (const auto& [n, a] : f.coeffs()) {
        bool in_support = true;
        if (auto* k = std::get_if<SinglePrimeKernel>(&spec)) {
            u64 m = n;
            while (m % k->q == 0) m /= k->q;
            in_support = m == 1;
        } else if (!std::holds_alternative<FullKernel>(spec)) {
            for (const auto& pp : factorize(n).factors)
                if (std::find(primes.begin(), primes.end(), pp.prime) == primes.end()) in_support = false;
        }
        if (in_support) total += n == 1 ? a : a * std::exp(-w * std::log(static_cast<double>(n)));
    }
    return total;
}

// C_phi^* applied to a kernel, in closed form.
inline KernelSpec adjoint_image(const Symbol& phi, const KernelSpec& spec) {
    validate(spec);
    if (std::holds_alternative<FullKernel>(spec))
        throw UnsupportedError("adjoint_image: Full kernels are not a supported source family");
    if (auto* k = std::get_if<SinglePrimeKernel>(&spec)) {
        const auto rest = nonconstant_part(phi.psi);
        if (phi.c0 != 0 || rest.size() > 1)
            throw UnsupportedError("adjoint_image: single-prime kernels need a symbol c1 + c_r r^{-s}");
        if (rest.is_zero()) {
            KernelSpec out = FullKernel{phi.c1()};
            validate(out);
            return out;
        }
        const u64 r = rest.coeffs().begin()->first;
        u64 m = k->q;
        while (m < r && r / m >= k->q) m *= k->q;
        KernelSpec out;
        if (m == r)
            out = FullKernel{evaluate(phi, k->w)};
        else if (is_mult_independent({k->q, r}))
            out = FullKernel{phi.c1()};
        else
            throw UnsupportedError("adjoint_image: r and q are dependent but r is not a power of q");
        validate(out);
        return out;
    }
    const auto primes = detail::kernel_primes(spec);
    const cplx w = detail::kernel_parameter(spec);
    const cplx image = evaluate(project_Q(phi, primes), w);
    KernelSpec out;
    if (phi.c0 == 0)
        out = FullKernel{image};
    else if (auto* k = std::get_if<PartialDKernel>(&spec))
        out = PartialDKernel{k->d, image};
    else
        out = PartialQKernel{primes, image};
    validate(out);
    return out;
}

enum class KernelFamily { PartialD, PartialQ, SinglePrime };
enum class PathKind { Radial, Slanted, SqrtSlanted, PrimePower };

inline const char* to_string(PathKind p) {
    switch (p) {
        case PathKind::Radial: return "radial";
        case PathKind::Slanted: return "slanted";
        case PathKind::SqrtSlanted: return "sqrt_slanted";
        case PathKind::PrimePower: return "prime_power";
    }
    return "?";
}

struct KRange {
    u64 first = 1;
    u64 last = 0;
    std::size_t count = 0;
    bool log_spaced = true;
};

// Distinct, increasing k values of the range.
inline std::vector<u64> k_values(const KRange& r) {
    std::vector<u64> ks;
    if (r.count == 0 || r.first == 0 || r.first > r.last) return ks;
    if (r.count == 1 || r.first == r.last) return {r.first};
    for (std::size_t j = 0; j < r.count; ++j) {
        const double t = static_cast<double>(j) / static_cast<double>(r.count - 1);
        double x;
        if (r.log_spaced)
            x = std::exp(std::log(double(r.first)) + t * (std::log(double(r.last)) - std::log(double(r.first))));
        else
            x = double(r.first) + t * double(r.last - r.first);
        auto k = static_cast<u64>(std::llround(x));
        k = std::clamp(k, r.first, r.last);
        if (ks.empty() || k > ks.back()) ks.push_back(k);
    }
    return ks;
}

struct KernelSequencePlan {
    KernelFamily family = KernelFamily::PartialD;
    int d = 1;                  // PartialD
    std::vector<u64> primes;    // PartialQ
    u64 q = 2;                  // SinglePrime
    PathKind path = PathKind::Radial;
    double M = 1.0;
    KRange k;
};

// radial 1/k; slanted 1/k + iM/k; sqrt_slanted 1/k + iM/sqrt(k); prime_power M/k + i/sqrt(k)
inline cplx path_point(PathKind path, double M, u64 k) {
    const double kd = static_cast<double>(k);
    switch (path) {
        case PathKind::Radial: return {1.0 / kd, 0.0};
        case PathKind::Slanted: return {1.0 / kd, M / kd};
        case PathKind::SqrtSlanted: return {1.0 / kd, M / std::sqrt(kd)};
        case PathKind::PrimePower: return {M / kd, 1.0 / std::sqrt(kd)};
    }
    return {};
}

inline KernelSpec plan_spec(const KernelSequencePlan& plan, cplx w) {
    switch (plan.family) {
        case KernelFamily::PartialD: return PartialDKernel{plan.d, w};
        case KernelFamily::PartialQ: return PartialQKernel{plan.primes, w};
        case KernelFamily::SinglePrime: return SinglePrimeKernel{plan.q, w};
    }
    return PartialDKernel{plan.d, w};
}

// Number of primes the family ranges over; sets the exponent in norm^2 ~ A / (Re w)^d.
inline int plan_dimension(const KernelSequencePlan& plan) {
    switch (plan.family) {
        case KernelFamily::PartialD: return plan.d;
        case KernelFamily::PartialQ: return static_cast<int>(plan.primes.size());
        case KernelFamily::SinglePrime: return 1;
    }
    return 1;
}

struct KernelSample {
    u64 k = 0;
    KernelSpec spec;
    double norm_sq = 0.0;
};

inline std::vector<KernelSample> kernel_sequence(const KernelSequencePlan& plan) {
    if (plan.path == PathKind::PrimePower && !(plan.M > 0.0))
        throw DomainError("prime_power path needs M > 0 so that Re w_k > 0");
    std::vector<KernelSample> out;
    for (u64 k : k_values(plan.k)) {
        KernelSpec spec = plan_spec(plan, path_point(plan.path, plan.M, k));
        const double n2 = kernel_norm_sq(spec);
        out.push_back({k, std::move(spec), n2});
    }
    return out;
}

inline void to_json(nlohmann::json& j, const KernelSpec& spec) {
    auto wj = [](cplx w) { return nlohmann::json::array({w.real(), w.imag()}); };
    if (auto* k = std::get_if<FullKernel>(&spec))
        j = {{"family", "Full"}, {"w", wj(k->w)}};
    else if (auto* k = std::get_if<PartialDKernel>(&spec))
        j = {{"family", "PartialD"}, {"d", k->d}, {"w", wj(k->w)}};
    else if (auto* k = std::get_if<PartialQKernel>(&spec))
        j = {{"family", "PartialQ"}, {"primes", k->primes}, {"w", wj(k->w)}};
    else if (auto* k = std::get_if<SinglePrimeKernel>(&spec))
        j = {{"family", "SinglePrime"}, {"q", k->q}, {"w", wj(k->w)}};
}

}  // namespace hcomp
