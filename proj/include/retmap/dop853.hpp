#ifndef RETMAP_DOP853_HPP_
#define RETMAP_DOP853_HPP_

// Adaptive Dormand-Prince 8(5,3) integrator with 7th-order dense output, after
// Hairer & Wanner's DOP853. Fixed-size state, every accepted step is handed
// to an observer together with its dense-output interpolant.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <type_traits>

#include "retmap/errors.hpp"

namespace retmap {

template <std::size_t N>
using StateVec = std::array<double, N>;

struct Dop853Options {
  double rtol = 1e-12;
  double atol = 1e-14;
  long max_steps = 2'000'000;
  double h_max = std::numeric_limits<double>::infinity();
};

template <std::size_t N, class Rhs, class Observer>
struct Dop853Stepper;

template <std::size_t N>
class DenseStep {
 public:
  double t_begin() const { return t_old_; }
  double t_end() const { return t_old_ + h_; }

  StateVec<N> operator()(double t) const {
    const double s = (t - t_old_) / h_;
    const double s1 = 1.0 - s;
    StateVec<N> out;
    for (std::size_t i = 0; i < N; ++i) {
      out[i] = rc_[0][i] +
               s * (rc_[1][i] +
                    s1 * (rc_[2][i] +
                          s * (rc_[3][i] + s1 * (rc_[4][i] + s * (rc_[5][i] + s1 * (rc_[6][i] + s * rc_[7][i]))))));
    }
    return out;
  }

 private:
  template <std::size_t M, class Rhs, class Observer>
  friend struct Dop853Stepper;

  double t_old_ = 0.0;
  double h_ = 0.0;
  std::array<StateVec<N>, 8> rc_{};
};

struct IntegrationStats {
  long steps = 0;
  long accepted = 0;
  long rejected = 0;
  long rhs_evals = 0;
};

template <std::size_t N, class Rhs, class Observer>
struct Dop853Stepper {
  using V = StateVec<N>;

  Rhs& f;
  Observer& observe;
  const Dop853Options& opts;
  IntegrationStats stats{};

  V eval(double t, const V& y) {
    ++stats.rhs_evals;
    return f(t, y);
  }

  // y + h * sum_j a_j k_j
  template <std::size_t K>
  static V combine(const V& y, double h, const std::array<double, K>& a, const std::array<const V*, K>& k) {
    V out = y;
    for (std::size_t i = 0; i < N; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < K; ++j) acc += a[j] * (*k[j])[i];
      out[i] += h * acc;
    }
    return out;
  }

  double initial_step(double t, const V& y, const V& k1, double h_max) {
    double dnf = 0.0;
    double dny = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sk = opts.atol + opts.rtol * std::abs(y[i]);
      dnf += (k1[i] / sk) * (k1[i] / sk);
      dny += (y[i] / sk) * (y[i] / sk);
    }
    double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
    h = std::min(h, h_max);
    V y1;
    for (std::size_t i = 0; i < N; ++i) y1[i] = y[i] + h * k1[i];
    const V k2 = eval(t + h, y1);
    double der2 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sq = (k2[i] - k1[i]) / (opts.atol + opts.rtol * std::abs(y[i]));
      der2 += sq * sq;
    }
    der2 = std::sqrt(der2) / h;
    const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
    const double h1 = der12 <= 1e-15 ? std::max(1e-6, std::abs(h) * 1e-3) : std::pow(0.01 / der12, 0.125);
    return std::min({100.0 * std::abs(h), h1, h_max});
  }

  IntegrationStats run(double t, V y, double t_end) {
    // Stage nodes, weights and error coefficients of DOP853.
    constexpr double c2 = 0.526001519587677318785587544488E-01, c3 = 0.789002279381515978178381316732E-01,
                     c4 = 0.118350341907227396726757197510E+00, c5 = 0.281649658092772603273242802490E+00,
                     c6 = 0.333333333333333333333333333333E+00, c7 = 0.25E+00,
                     c8 = 0.307692307692307692307692307692E+00, c9 = 0.651282051282051282051282051282E+00,
                     c10 = 0.6E+00, c11 = 0.857142857142857142857142857142E+00, c14 = 0.1E+00, c15 = 0.2E+00,
                     c16 = 0.777777777777777777777777777778E+00;
    constexpr double b1 = 5.42937341165687622380535766363E-2, b6 = 4.45031289275240888144113950566E0,
                     b7 = 1.89151789931450038304281599044E0, b8 = -5.8012039600105847814672114227E0,
                     b9 = 3.1116436695781989440891606237E-1, b10 = -1.52160949662516078556178806805E-1,
                     b11 = 2.01365400804030348374776537501E-1, b12 = 4.47106157277725905176885569043E-2;
    constexpr double bhh1 = 0.244094488188976377952755905512E+00, bhh2 = 0.733846688281611857341361741547E+00,
                     bhh3 = 0.220588235294117647058823529412E-01;
    constexpr double er1 = 0.1312004499419488073250102996E-01, er6 = -0.1225156446376204440720569753E+01,
                     er7 = -0.4957589496572501915214079952E+00, er8 = 0.1664377182454986536961530415E+01,
                     er9 = -0.3503288487499736816886487290E+00, er10 = 0.3341791187130174790297318841E+00,
                     er11 = 0.8192320648511571246570742613E-01, er12 = -0.2235530786388629525884427845E-01;

    constexpr std::array<double, 1> a2{5.26001519587677318785587544488E-2};
    constexpr std::array<double, 2> a3{1.97250569845378994544595329183E-2, 5.91751709536136983633785987549E-2};
    constexpr std::array<double, 2> a4{2.95875854768068491816892993775E-2, 8.87627564304205475450678981324E-2};
    constexpr std::array<double, 3> a5{2.41365134159266685502369798665E-1, -8.84549479328286085344864962717E-1,
                                       9.24834003261792003115737966543E-1};
    constexpr std::array<double, 3> a6{3.7037037037037037037037037037E-2, 1.70828608729473871279604482173E-1,
                                       1.25467687566822425016691814123E-1};
    constexpr std::array<double, 4> a7{3.7109375E-2, 1.70252211019544039314978060272E-1,
                                       6.02165389804559606850219397283E-2, -1.7578125E-2};
    constexpr std::array<double, 5> a8{3.70920001185047927108779319836E-2, 1.70383925712239993810214054705E-1,
                                       1.07262030446373284651809199168E-1, -1.53194377486244017527936158236E-2,
                                       8.27378916381402288758473766002E-3};
    constexpr std::array<double, 6> a9{6.24110958716075717114429577812E-1, -3.36089262944694129406857109825E0,
                                       -8.68219346841726006818189891453E-1, 2.75920996994467083049415600797E1,
                                       2.01540675504778934086186788979E1, -4.34898841810699588477366255144E1};
    constexpr std::array<double, 7> a10{4.77662536438264365890433908527E-1, -2.48811461997166764192642586468E0,
                                        -5.90290826836842996371446475743E-1, 2.12300514481811942347288949897E1,
                                        1.52792336328824235832596922938E1, -3.32882109689848629194453265587E1,
                                        -2.03312017085086261358222928593E-2};
    constexpr std::array<double, 8> a11{-9.3714243008598732571704021658E-1, 5.18637242884406370830023853209E0,
                                        1.09143734899672957818500254654E0, -8.14978701074692612513997267357E0,
                                        -1.85200656599969598641566180701E1, 2.27394870993505042818970056734E1,
                                        2.49360555267965238987089396762E0, -3.0467644718982195003823669022E0};
    constexpr std::array<double, 9> a12{2.27331014751653820792359768449E0, -1.05344954667372501984066689879E1,
                                        -2.00087205822486249909675718444E0, -1.79589318631187989172765950534E1,
                                        2.79488845294199600508499808837E1, -2.85899827713502369474065508674E0,
                                        -8.87285693353062954433549289258E0, 1.23605671757943030647266201528E1,
                                        6.43392746015763530355970484046E-1};
    constexpr std::array<double, 8> a14{5.61675022830479523392909219681E-2, 2.53500210216624811088794765333E-1,
                                        -2.46239037470802489917441475441E-1, -1.24191423263816360469010140626E-1,
                                        1.5329179827876569731206322685E-1, 8.20105229563468988491666602057E-3,
                                        7.56789766054569976138603589584E-3, -8.298E-3};
    constexpr std::array<double, 8> a15{3.18346481635021405060768473261E-2, 2.83009096723667755288322961402E-2,
                                        5.35419883074385676223797384372E-2, -5.49237485713909884646569340306E-2,
                                        -1.08347328697249322858509316994E-4, 3.82571090835658412954920192323E-4,
                                        -3.40465008687404560802977114492E-4, 1.41312443674632500278074618366E-1};
    constexpr std::array<double, 8> a16{-4.28896301583791923408573538692E-1, -4.69762141536116384314449447206E0,
                                        7.68342119606259904184240953878E0, 4.06898981839711007970213554331E0,
                                        3.56727187455281109270669543021E-1, -1.39902416515901462129418009734E-3,
                                        2.9475147891527723389556272149E0, -9.15095847217987001081870187138E0};
    // Dense-output rows d4..d7 over (k1, k6, k7, k8, k9, k10, k11, k12, kf, k14, k15, k16).
    constexpr std::array<std::array<double, 12>, 4> d{{
        {-0.84289382761090128651353491142E+01, 0.56671495351937776962531783590E+00,
         -0.30689499459498916912797304727E+01, 0.23846676565120698287728149680E+01,
         0.21170345824450282767155149946E+01, -0.87139158377797299206789907490E+00,
         0.22404374302607882758541771650E+01, 0.63157877876946881815570249290E+00,
         -0.88990336451333310820698117400E-01, 0.18148505520854727256656404962E+02,
         -0.91946323924783554000451984436E+01, -0.44360363875948939664310572000E+01},
        {0.10427508642579134603413151009E+02, 0.24228349177525818288430175319E+03,
         0.16520045171727028198505394887E+03, -0.37454675472269020279518312152E+03,
         -0.22113666853125306036270938578E+02, 0.77334326684722638389603898808E+01,
         -0.30674084731089398182061213626E+02, -0.93321305264302278729567221706E+01,
         0.15697238121770843886131091075E+02, -0.31139403219565177677282850411E+02,
         -0.93529243588444783865713862664E+01, 0.35816841486394083752465898540E+02},
        {0.19985053242002433820987653617E+02, -0.38703730874935176555105901742E+03,
         -0.18917813819516756882830838328E+03, 0.52780815920542364900561016686E+03,
         -0.11573902539959630126141871134E+02, 0.68812326946963000169666922661E+01,
         -0.10006050966910838403183860980E+01, 0.77771377980534432092869265740E+00,
         -0.27782057523535084065932004339E+01, -0.60196695231264120758267380846E+02,
         0.84320405506677161018159903784E+02, 0.11992291136182789328035130030E+02},
        {-0.25693933462703749003312586129E+02, -0.15418974869023643374053993627E+03,
         -0.23152937917604549567536039109E+03, 0.35763911791061412378285349910E+03,
         0.93405324183624310003907691704E+02, -0.37458323136451633156875139351E+02,
         0.10409964950896230045147246184E+03, 0.29840293426660503123344363579E+02,
         -0.43533456590011143754432175058E+02, 0.96324553959188282948394950600E+02,
         -0.39177261675615439165231486172E+02, -0.14972683625798562581422125276E+03},
    }};

    constexpr double safe = 0.9, fac1 = 1.0 / 3.0, fac2 = 6.0, uround = 2.3e-16;
    const double facc1 = 1.0 / fac1;
    const double facc2 = 1.0 / fac2;
    const double direction = t_end > t ? 1.0 : -1.0;
    const double h_max = std::min(opts.h_max, std::abs(t_end - t));
    bool reject = false;
    bool last = false;

    V k1 = eval(t, y);
    double h = direction * initial_step(t, y, k1, h_max);
    DenseStep<N> dense;

    while (true) {
      if (stats.steps > opts.max_steps) {
        throw IntegrationFailure("dop853: step limit " + std::to_string(opts.max_steps) + " exceeded at t = " +
                                 std::to_string(t));
      }
      if (0.1 * std::abs(h) <= std::abs(t) * uround) {
        throw IntegrationFailure("dop853: step size underflow at t = " + std::to_string(t));
      }
      if ((t + 1.01 * h - t_end) * direction > 0.0) {
        h = t_end - t;
        last = true;
      }
      ++stats.steps;

      const V k2 = eval(t + c2 * h, combine(y, h, a2, {&k1}));
      const V k3 = eval(t + c3 * h, combine(y, h, a3, {&k1, &k2}));
      const V k4 = eval(t + c4 * h, combine(y, h, a4, {&k1, &k3}));
      const V k5 = eval(t + c5 * h, combine(y, h, a5, {&k1, &k3, &k4}));
      const V k6 = eval(t + c6 * h, combine(y, h, a6, {&k1, &k4, &k5}));
      const V k7 = eval(t + c7 * h, combine(y, h, a7, {&k1, &k4, &k5, &k6}));
      const V k8 = eval(t + c8 * h, combine(y, h, a8, {&k1, &k4, &k5, &k6, &k7}));
      const V k9 = eval(t + c9 * h, combine(y, h, a9, {&k1, &k4, &k5, &k6, &k7, &k8}));
      const V k10 = eval(t + c10 * h, combine(y, h, a10, {&k1, &k4, &k5, &k6, &k7, &k8, &k9}));
      const V k11 = eval(t + c11 * h, combine(y, h, a11, {&k1, &k4, &k5, &k6, &k7, &k8, &k9, &k10}));
      const double t_new = t + h;
      const V k12 = eval(t_new, combine(y, h, a12, {&k1, &k4, &k5, &k6, &k7, &k8, &k9, &k10, &k11}));

      V incr;
      V y_new;
      for (std::size_t i = 0; i < N; ++i) {
        incr[i] = b1 * k1[i] + b6 * k6[i] + b7 * k7[i] + b8 * k8[i] + b9 * k9[i] + b10 * k10[i] + b11 * k11[i] +
                  b12 * k12[i];
        y_new[i] = y[i] + h * incr[i];
      }

      double err = 0.0;
      double err2 = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        const double sk = 1.0 / (opts.atol + opts.rtol * std::max(std::abs(y[i]), std::abs(y_new[i])));
        double sq = (incr[i] - bhh1 * k1[i] - bhh2 * k9[i] - bhh3 * k12[i]) * sk;
        err2 += sq * sq;
        sq = (er1 * k1[i] + er6 * k6[i] + er7 * k7[i] + er8 * k8[i] + er9 * k9[i] + er10 * k10[i] + er11 * k11[i] +
              er12 * k12[i]) *
             sk;
        err += sq * sq;
      }
      double deno = err + 0.01 * err2;
      if (deno <= 0.0) deno = 1.0;
      err = std::abs(h) * err * std::sqrt(1.0 / (deno * static_cast<double>(N)));

      const double fac11 = std::pow(err, 0.125);
      const double fac = std::max(facc2, std::min(facc1, fac11 / safe));
      double h_new = h / fac;

      if (err <= 1.0) {
        ++stats.accepted;
        const V kf = eval(t_new, y_new);

        // Dense output.
        dense.t_old_ = t;
        dense.h_ = h;
        const std::array<const V*, 8> base{&k1, &k6, &k7, &k8, &k9, &k10, &k11, &k12};
        for (std::size_t i = 0; i < N; ++i) {
          const double ydiff = y_new[i] - y[i];
          const double bspl = h * k1[i] - ydiff;
          dense.rc_[0][i] = y[i];
          dense.rc_[1][i] = ydiff;
          dense.rc_[2][i] = bspl;
          dense.rc_[3][i] = ydiff - h * kf[i] - bspl;
        }
        const V k14 = eval(t + c14 * h, combine(y, h, a14, {&k1, &k7, &k8, &k9, &k10, &k11, &k12, &kf}));
        const V k15 = eval(t + c15 * h, combine(y, h, a15, {&k1, &k6, &k7, &k8, &k11, &k12, &kf, &k14}));
        const V k16 = eval(t + c16 * h, combine(y, h, a16, {&k1, &k6, &k7, &k8, &k9, &kf, &k14, &k15}));
        for (std::size_t r = 0; r < 4; ++r) {
          for (std::size_t i = 0; i < N; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < base.size(); ++j) acc += d[r][j] * (*base[j])[i];
            acc += d[r][8] * kf[i] + d[r][9] * k14[i] + d[r][10] * k15[i] + d[r][11] * k16[i];
            dense.rc_[4 + r][i] = h * acc;
          }
        }

        k1 = kf;
        y = y_new;
        t = t_new;
        if (observe(dense, t, y) || last) return stats;

        if (std::abs(h_new) > h_max) h_new = direction * h_max;
        if (reject) h_new = direction * std::min(std::abs(h_new), std::abs(h));
        reject = false;
      } else {
        h_new = h / std::min(facc1, fac11 / safe);
        reject = true;
        if (stats.accepted >= 1) ++stats.rejected;
        last = false;
      }
      h = h_new;
    }
  }
};

// Integrates y' = f(t, y) from t0 towards t_end. After each accepted step
// observer(dense_step, t, y) is called; returning true stops the integration.
template <std::size_t N, class Rhs, class Observer>
IntegrationStats dop853_integrate(Rhs&& f, double t0, const StateVec<N>& y0, double t_end,
                                  const Dop853Options& opts, Observer&& observer) {
  Dop853Stepper<N, std::remove_reference_t<Rhs>, std::remove_reference_t<Observer>> stepper{f, observer, opts};
  return stepper.run(t0, y0, t_end);
}

}  // namespace retmap

#endif  // RETMAP_DOP853_HPP_
