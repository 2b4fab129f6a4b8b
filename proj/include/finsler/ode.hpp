#pragma once

// Explicit Runge-Kutta 8(5,3) of Dormand and Prince with the step-size
// control of Hairer, Norsett and Wanner. Output times are served by the
// order-7 continuous extension, so the step size is set by the tolerance
// alone and not by the output grid.
//
// A step whose stages fail (right-hand side throws, non-finite values, or the
// state leaves the admissible set) is retried with half the step. When the
// step falls below `min_step` the integration stops and reports an exit.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "finsler/errors.hpp"
#include "finsler/linalg.hpp"

namespace finsler {

struct OdeOptions {
    double rtol = 1e-10;
    double atol = 1e-10;
    double min_step = 1e-10;
    double initial_step = 0.0; // 0 picks a heuristic
    long max_steps = 1000000;
};

struct OdeResult {
    std::vector<double> times;
    std::vector<Vec> states;
    bool exited = false;
    double exit_time = 0.0;
    long accepted = 0;
    long rejected = 0;
};

namespace dop853 {

inline constexpr double c2 = 0.526001519587677318785587544488e-01;
inline constexpr double c3 = 0.789002279381515978178381316732e-01;
inline constexpr double c4 = 0.118350341907227396726757197510e+00;
inline constexpr double c5 = 0.281649658092772603273242802490e+00;
inline constexpr double c6 = 0.333333333333333333333333333333e+00;
inline constexpr double c7 = 0.25e+00;
inline constexpr double c8 = 0.307692307692307692307692307692e+00;
inline constexpr double c9 = 0.651282051282051282051282051282e+00;
inline constexpr double c10 = 0.6e+00;
inline constexpr double c11 = 0.857142857142857142857142857142e+00;

inline constexpr double a21 = 5.26001519587677318785587544488e-2;
inline constexpr double a31 = 1.97250569845378994544595329183e-2;
inline constexpr double a32 = 5.91751709536136983633785987549e-2;
inline constexpr double a41 = 2.95875854768068491816892993775e-2;
inline constexpr double a43 = 8.87627564304205475450678981324e-2;
inline constexpr double a51 = 2.41365134159266685502369798665e-1;
inline constexpr double a53 = -8.84549479328286085344864962717e-1;
inline constexpr double a54 = 9.24834003261792003115737966543e-1;
inline constexpr double a61 = 3.7037037037037037037037037037e-2;
inline constexpr double a64 = 1.70828608729473871279604482173e-1;
inline constexpr double a65 = 1.25467687566822425016691814123e-1;
inline constexpr double a71 = 3.7109375e-2;
inline constexpr double a74 = 1.70252211019544039314978060272e-1;
inline constexpr double a75 = 6.02165389804559606850219397283e-2;
inline constexpr double a76 = -1.7578125e-2;
inline constexpr double a81 = 3.70920001185047927108779319836e-2;
inline constexpr double a84 = 1.70383925712239993810214054705e-1;
inline constexpr double a85 = 1.07262030446373284651809199168e-1;
inline constexpr double a86 = -1.53194377486244017527936158236e-2;
inline constexpr double a87 = 8.27378916381402288758473766002e-3;
inline constexpr double a91 = 6.24110958716075717114429577812e-1;
inline constexpr double a94 = -3.36089262944694129406857109825e0;
inline constexpr double a95 = -8.68219346841726006818189891453e-1;
inline constexpr double a96 = 2.75920996994467083049415600797e1;
inline constexpr double a97 = 2.01540675504778934086186788979e1;
inline constexpr double a98 = -4.34898841810699588477366255144e1;
inline constexpr double a101 = 4.77662536438264365890433908527e-1;
inline constexpr double a104 = -2.48811461997166764192642586468e0;
inline constexpr double a105 = -5.90290826836842996371446475743e-1;
inline constexpr double a106 = 2.12300514481811942347288949897e1;
inline constexpr double a107 = 1.52792336328824235832596922938e1;
inline constexpr double a108 = -3.32882109689848629194453265587e1;
inline constexpr double a109 = -2.03312017085086261358222928593e-2;
inline constexpr double a111 = -9.3714243008598732571704021658e-1;
inline constexpr double a114 = 5.18637242884406370830023853209e0;
inline constexpr double a115 = 1.09143734899672957818500254654e0;
inline constexpr double a116 = -8.14978701074692612513997267357e0;
inline constexpr double a117 = -1.85200656599969598641566180701e1;
inline constexpr double a118 = 2.27394870993505042818970056734e1;
inline constexpr double a119 = 2.49360555267965238987089396762e0;
inline constexpr double a1110 = -3.0467644718982195003823669022e0;
inline constexpr double a121 = 2.27331014751653820792359768449e0;
inline constexpr double a124 = -1.05344954667372501984066689879e1;
inline constexpr double a125 = -2.00087205822486249909675718444e0;
inline constexpr double a126 = -1.79589318631187989172765950534e1;
inline constexpr double a127 = 2.79488845294199600508499808837e1;
inline constexpr double a128 = -2.85899827713502369474065508674e0;
inline constexpr double a129 = -8.87285693353062954433549289258e0;
inline constexpr double a1210 = 1.23605671757943030647266201528e1;
inline constexpr double a1211 = 6.43392746015763530355970484046e-1;

inline constexpr double b1 = 5.42937341165687622380535766363e-2;
inline constexpr double b6 = 4.45031289275240888144113950566e0;
inline constexpr double b7 = 1.89151789931450038304281599044e0;
inline constexpr double b8 = -5.8012039600105847814672114227e0;
inline constexpr double b9 = 3.1116436695781989440891606237e-1;
inline constexpr double b10 = -1.52160949662516078556178806805e-1;
inline constexpr double b11 = 2.01365400804030348374776537501e-1;
inline constexpr double b12 = 4.47106157277725905176885569043e-2;

inline constexpr double bhh1 = 0.244094488188976377952755905512e+00;
inline constexpr double bhh2 = 0.733846688281611857341361741547e+00;
inline constexpr double bhh3 = 0.220588235294117647058823529412e-01;

inline constexpr double er1 = 0.1312004499419488073250102996e-01;
inline constexpr double er6 = -0.1225156446376204440720569753e+01;
inline constexpr double er7 = -0.4957589496572501915214079952e+00;
inline constexpr double er8 = 0.1664377182454986536961530415e+01;
inline constexpr double er9 = -0.3503288487499736816886487290e+00;
inline constexpr double er10 = 0.3341791187130174790297318841e+00;
inline constexpr double er11 = 0.8192320648511571246570742613e-01;
inline constexpr double er12 = -0.2235530786388629525884427845e-01;

// continuous extension of order 7
inline constexpr double c14 = 0.1e+00;
inline constexpr double c15 = 0.2e+00;
inline constexpr double c16 = 0.777777777777777777777777777778e+00;
inline constexpr double a141 = 5.61675022830479523392909219681e-2;
inline constexpr double a147 = 2.53500210216624811088794765333e-1;
inline constexpr double a148 = -2.46239037470802489917441475441e-1;
inline constexpr double a149 = -1.24191423263816360469010140626e-1;
inline constexpr double a1410 = 1.5329179827876569731206322685e-1;
inline constexpr double a1411 = 8.20105229563468988491666602057e-3;
inline constexpr double a1412 = 7.56789766054569976138603589584e-3;
inline constexpr double a1413 = -8.298e-3;
inline constexpr double a151 = 3.18346481635021405060768473261e-2;
inline constexpr double a156 = 2.83009096723667755288322961402e-2;
inline constexpr double a157 = 5.35419883074385676223797384372e-2;
inline constexpr double a158 = -5.49237485713909884646569340306e-2;
inline constexpr double a1511 = -1.08347328697249322858509316994e-4;
inline constexpr double a1512 = 3.82571090835658412954920192323e-4;
inline constexpr double a1513 = -3.40465008687404560802977114492e-4;
inline constexpr double a1514 = 1.41312443674632500278074618366e-1;
inline constexpr double a161 = -4.28896301583791923408573538692e-1;
inline constexpr double a166 = -4.69762141536116384314449447206e0;
inline constexpr double a167 = 7.68342119606259904184240953878e0;
inline constexpr double a168 = 4.06898981839711007970213554331e0;
inline constexpr double a169 = 3.56727187455281109270669543021e-1;
inline constexpr double a1613 = -1.39902416515901462129418009734e-3;
inline constexpr double a1614 = 2.9475147891527723389556272149e0;
inline constexpr double a1615 = -9.15095847217987001081870187138e0;
inline constexpr double d41 = -0.84289382761090128651353491142e+01;
inline constexpr double d46 = 0.56671495351937776962531783590e+00;
inline constexpr double d47 = -0.30689499459498916912797304727e+01;
inline constexpr double d48 = 0.23846676565120698287728149680e+01;
inline constexpr double d49 = 0.21170345824450282767155149946e+01;
inline constexpr double d410 = -0.87139158377797299206789907490e+00;
inline constexpr double d411 = 0.22404374302607882758541771650e+01;
inline constexpr double d412 = 0.63157877876946881815570249290e+00;
inline constexpr double d413 = -0.88990336451333310820698117400e-01;
inline constexpr double d414 = 0.18148505520854727256656404962e+02;
inline constexpr double d415 = -0.91946323924783554000451984436e+01;
inline constexpr double d416 = -0.44360363875948939664310572000e+01;
inline constexpr double d51 = 0.10427508642579134603413151009e+02;
inline constexpr double d56 = 0.24228349177525818288430175319e+03;
inline constexpr double d57 = 0.16520045171727028198505394887e+03;
inline constexpr double d58 = -0.37454675472269020279518312152e+03;
inline constexpr double d59 = -0.22113666853125306036270938578e+02;
inline constexpr double d510 = 0.77334326684722638389603898808e+01;
inline constexpr double d511 = -0.30674084731089398182061213626e+02;
inline constexpr double d512 = -0.93321305264302278729567221706e+01;
inline constexpr double d513 = 0.15697238121770843886131091075e+02;
inline constexpr double d514 = -0.31139403219565177677282850411e+02;
inline constexpr double d515 = -0.93529243588444783865713862664e+01;
inline constexpr double d516 = 0.35816841486394083752465898540e+02;
inline constexpr double d61 = 0.19985053242002433820987653617e+02;
inline constexpr double d66 = -0.38703730874935176555105901742e+03;
inline constexpr double d67 = -0.18917813819516756882830838328e+03;
inline constexpr double d68 = 0.52780815920542364900561016686e+03;
inline constexpr double d69 = -0.11573902539959630126141871134e+02;
inline constexpr double d610 = 0.68812326946963000169666922661e+01;
inline constexpr double d611 = -0.10006050966910838403183860980e+01;
inline constexpr double d612 = 0.77771377980534432092869265740e+00;
inline constexpr double d613 = -0.27782057523535084065932004339e+01;
inline constexpr double d614 = -0.60196695231264120758267380846e+02;
inline constexpr double d615 = 0.84320405506677161018159903784e+02;
inline constexpr double d616 = 0.11992291136182789328035130030e+02;
inline constexpr double d71 = -0.25693933462703749003312586129e+02;
inline constexpr double d76 = -0.15418974869023643374053993627e+03;
inline constexpr double d77 = -0.23152937917604549567536039109e+03;
inline constexpr double d78 = 0.35763911791061412378285349910e+03;
inline constexpr double d79 = 0.93405324183624310003907691704e+02;
inline constexpr double d710 = -0.37458323136451633156875139351e+02;
inline constexpr double d711 = 0.10409964950896230045147246184e+03;
inline constexpr double d712 = 0.29840293426660503123344363579e+02;
inline constexpr double d713 = -0.43533456590011143754432175058e+02;
inline constexpr double d714 = 0.96324553959188282948394950600e+02;
inline constexpr double d715 = -0.39177261675615439165231486172e+02;
inline constexpr double d716 = -0.14972683625798562581422125276e+03;

} // namespace dop853

using OdeRhs = std::function<void(double, const Vec&, Vec&)>;
using OdeAdmissible = std::function<bool(const Vec&)>;

/// Integrate z' = f(t, z) from (t0, z0) through the increasing output times.
/// The state at t0 is recorded when t0 equals the first output time.
inline OdeResult integrate_dop853(const OdeRhs& f, double t0, Vec z0, const std::vector<double>& outputs,
                                  const OdeOptions& opt = {}, const OdeAdmissible& admissible = {})
{
    using namespace dop853;
    const std::size_t n = z0.size();
    OdeResult res;
    std::size_t next = 0;
    while (next < outputs.size() && outputs[next] <= t0) {
        if (outputs[next] == t0) {
            res.times.push_back(t0);
            res.states.push_back(z0);
        }
        ++next;
    }
    if (next == outputs.size()) {
        return res;
    }

    std::vector<Vec> k(15, Vec(n));
    Vec tmp(n);
    Vec z1(n);
    auto eval = [&](double t, const Vec& z, Vec& out) -> bool {
        if (admissible && !admissible(z)) {
            return false;
        }
        try {
            f(t, z, out);
        } catch (const DomainError&) {
            return false;
        } catch (const DegenerateMetricError&) {
            return false;
        } catch (const ImplicitSolveError&) {
            return false;
        }
        for (double v : out) {
            if (!std::isfinite(v)) {
                return false;
            }
        }
        return true;
    };

    double t = t0;
    Vec z = std::move(z0);
    if (!eval(t, z, k[0])) {
        throw DomainError("initial state is not admissible");
    }
    const double t_end = outputs.back();
    double h = opt.initial_step > 0.0 ? opt.initial_step : std::min(1e-2 * (t_end - t0), 0.1);
    bool last_rejected = false;
    // tmp = z + h * sum(a_j k_j)
    auto stage = [&](std::initializer_list<std::pair<int, double>> terms, double hh) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (const auto& [j, a] : terms) {
                s += a * k[j][i];
            }
            tmp[i] = z[i] + hh * s;
        }
    };
    auto fail = [&]() {
        ++res.rejected;
        h *= 0.5;
        last_rejected = true;
        if (std::abs(h) < opt.min_step) {
            res.exited = true;
            res.exit_time = t;
            return true;
        }
        return false;
    };
    Vec fz(n);
    std::vector<Vec> r(8, Vec(n));

    while (next < outputs.size()) {
        if (res.accepted + res.rejected >= opt.max_steps) {
            res.exited = true;
            res.exit_time = t;
            return res;
        }
        bool hits_end = false;
        if (t + h >= t_end - 1e-14 * std::max(1.0, std::abs(t_end))) {
            h = t_end - t;
            hits_end = true;
        }
        // k[10] and k[11] hold stages 11 and 12; k[12..14] the extra stages of the extension
        bool ok = true;
        ok = ok && (stage({{0, a21}}, h), eval(t + c2 * h, tmp, k[1]));
        ok = ok && (stage({{0, a31}, {1, a32}}, h), eval(t + c3 * h, tmp, k[2]));
        ok = ok && (stage({{0, a41}, {2, a43}}, h), eval(t + c4 * h, tmp, k[3]));
        ok = ok && (stage({{0, a51}, {2, a53}, {3, a54}}, h), eval(t + c5 * h, tmp, k[4]));
        ok = ok && (stage({{0, a61}, {3, a64}, {4, a65}}, h), eval(t + c6 * h, tmp, k[5]));
        ok = ok && (stage({{0, a71}, {3, a74}, {4, a75}, {5, a76}}, h), eval(t + c7 * h, tmp, k[6]));
        ok = ok && (stage({{0, a81}, {3, a84}, {4, a85}, {5, a86}, {6, a87}}, h), eval(t + c8 * h, tmp, k[7]));
        ok = ok && (stage({{0, a91}, {3, a94}, {4, a95}, {5, a96}, {6, a97}, {7, a98}}, h),
                    eval(t + c9 * h, tmp, k[8]));
        ok = ok && (stage({{0, a101}, {3, a104}, {4, a105}, {5, a106}, {6, a107}, {7, a108}, {8, a109}}, h),
                    eval(t + c10 * h, tmp, k[9]));
        ok = ok && (stage({{0, a111}, {3, a114}, {4, a115}, {5, a116}, {6, a117}, {7, a118}, {8, a119}, {9, a1110}},
                          h),
                    eval(t + c11 * h, tmp, k[10]));
        ok = ok && (stage({{0, a121},
                           {3, a124},
                           {4, a125},
                           {5, a126},
                           {6, a127},
                           {7, a128},
                           {8, a129},
                           {9, a1210},
                           {10, a1211}},
                          h),
                    eval(t + h, tmp, k[11]));
        double err = 0.0;
        if (ok) {
            double err2 = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double incr = b1 * k[0][i] + b6 * k[5][i] + b7 * k[6][i] + b8 * k[7][i] + b9 * k[8][i] +
                                    b10 * k[9][i] + b11 * k[10][i] + b12 * k[11][i];
                z1[i] = z[i] + h * incr;
                const double sk = opt.atol + opt.rtol * std::max(std::abs(z[i]), std::abs(z1[i]));
                const double e3 = incr - bhh1 * k[0][i] - bhh2 * k[8][i] - bhh3 * k[11][i];
                const double e5 = er1 * k[0][i] + er6 * k[5][i] + er7 * k[6][i] + er8 * k[7][i] + er9 * k[8][i] +
                                  er10 * k[9][i] + er11 * k[10][i] + er12 * k[11][i];
                err2 += (e3 / sk) * (e3 / sk);
                err += (e5 / sk) * (e5 / sk);
            }
            double deno = err + 0.01 * err2;
            if (deno <= 0.0) {
                deno = 1.0;
            }
            err = std::abs(h) * err * std::sqrt(1.0 / (static_cast<double>(n) * deno));
            ok = std::isfinite(err);
        }
        if (!ok) {
            if (fail()) {
                return res;
            }
            continue;
        }
        const double fac11 = std::pow(err, 0.125);
        if (err > 1.0) {
            ++res.rejected;
            h = h / std::min(3.0, fac11 / 0.9);
            last_rejected = true;
            if (std::abs(h) < opt.min_step) {
                res.exited = true;
                res.exit_time = t;
                return res;
            }
            continue;
        }
        if (!eval(t + h, z1, fz)) {
            if (fail()) {
                return res;
            }
            continue;
        }
        const double t_new = hits_end ? t_end : t + h;
        const bool dense = next < outputs.size() && outputs[next] < t_new;
        if (dense) {
            for (std::size_t i = 0; i < n; ++i) {
                const double ydiff = z1[i] - z[i];
                const double bspl = h * k[0][i] - ydiff;
                r[0][i] = z[i];
                r[1][i] = ydiff;
                r[2][i] = bspl;
                r[3][i] = ydiff - h * fz[i] - bspl;
                r[4][i] = d41 * k[0][i] + d46 * k[5][i] + d47 * k[6][i] + d48 * k[7][i] + d49 * k[8][i] +
                          d410 * k[9][i] + d411 * k[10][i] + d412 * k[11][i];
                r[5][i] = d51 * k[0][i] + d56 * k[5][i] + d57 * k[6][i] + d58 * k[7][i] + d59 * k[8][i] +
                          d510 * k[9][i] + d511 * k[10][i] + d512 * k[11][i];
                r[6][i] = d61 * k[0][i] + d66 * k[5][i] + d67 * k[6][i] + d68 * k[7][i] + d69 * k[8][i] +
                          d610 * k[9][i] + d611 * k[10][i] + d612 * k[11][i];
                r[7][i] = d71 * k[0][i] + d76 * k[5][i] + d77 * k[6][i] + d78 * k[7][i] + d79 * k[8][i] +
                          d710 * k[9][i] + d711 * k[10][i] + d712 * k[11][i];
            }
            k[3] = fz; // the extension uses f at the new point in the slot of stage 4
            bool ext = true;
            ext = ext && (stage({{0, a141}, {6, a147}, {7, a148}, {8, a149}, {9, a1410}, {10, a1411}, {11, a1412},
                                 {3, a1413}},
                                h),
                          eval(t + c14 * h, tmp, k[12]));
            ext = ext && (stage({{0, a151}, {5, a156}, {6, a157}, {7, a158}, {10, a1511}, {11, a1512}, {3, a1513},
                                 {12, a1514}},
                                h),
                          eval(t + c15 * h, tmp, k[13]));
            ext = ext && (stage({{0, a161}, {5, a166}, {6, a167}, {7, a168}, {8, a169}, {3, a1613}, {12, a1614},
                                 {13, a1615}},
                                h),
                          eval(t + c16 * h, tmp, k[14]));
            if (!ext) {
                if (fail()) {
                    return res;
                }
                continue;
            }
            for (std::size_t i = 0; i < n; ++i) {
                r[4][i] = h * (r[4][i] + d413 * k[3][i] + d414 * k[12][i] + d415 * k[13][i] + d416 * k[14][i]);
                r[5][i] = h * (r[5][i] + d513 * k[3][i] + d514 * k[12][i] + d515 * k[13][i] + d516 * k[14][i]);
                r[6][i] = h * (r[6][i] + d613 * k[3][i] + d614 * k[12][i] + d615 * k[13][i] + d616 * k[14][i]);
                r[7][i] = h * (r[7][i] + d713 * k[3][i] + d714 * k[12][i] + d715 * k[13][i] + d716 * k[14][i]);
            }
            while (next < outputs.size() && outputs[next] < t_new) {
                const double s = (outputs[next] - t) / h;
                const double s1 = 1.0 - s;
                Vec out(n);
                for (std::size_t i = 0; i < n; ++i) {
                    const double conpar = r[4][i] + s * (r[5][i] + s1 * (r[6][i] + s * r[7][i]));
                    out[i] = r[0][i] + s * (r[1][i] + s1 * (r[2][i] + s * (r[3][i] + s1 * conpar)));
                }
                res.times.push_back(outputs[next]);
                res.states.push_back(std::move(out));
                ++next;
            }
        }
        ++res.accepted;
        const double h_used = h;
        t = t_new;
        z = z1;
        k[0] = fz;
        if (next < outputs.size() && outputs[next] == t) {
            res.times.push_back(t);
            res.states.push_back(z);
            ++next;
        }
        double hnew = h_used / std::max(1.0 / 6.0, std::min(3.0, fac11 / 0.9));
        if (last_rejected) {
            hnew = std::min(hnew, h_used);
        }
        last_rejected = false;
        h = hnew;
    }
    return res;
}

} // namespace finsler
