// cli.hpp -- batch commands behind the command-line tool: build an immersion
// from a config, run the smoothing schedule, analyze lattice samples. Exit
// codes: 0 success, 2 validation/stage failure, 3 margin violation, 4 parse
// error, 1 anything else.
#pragma once

#include "io.hpp"
#include "smoothing.hpp"

#include <filesystem>
#include <iostream>

namespace devim {

inline int exit_code_for(const Error& e)
{
    switch (e.kind) {
    case ErrorKind::parse_error:
        return 4;
    case ErrorKind::margin_violation:
        return 3;
    case ErrorKind::invalid_input:
    case ErrorKind::precondition_violation:
    case ErrorKind::step_too_coarse:
    case ErrorKind::stage_failure:
    case ErrorKind::window_collapsed:
    case ErrorKind::insufficient_resolution:
        return 2;
    default:
        return 1;
    }
}

// ---- config -> domain objects ---------------------------------------------

inline ConvexDomain domain_from_config(const Config& cfg)
{
    std::string shape = cfg.get("domain", "shape");
    if (shape == "ball" || shape == "disc")
        return ConvexDomain::ball(cfg.get_vec("domain", "center"),
                                  cfg.get_double("domain", "radius"));
    if (shape == "ellipsoid")
        return ConvexDomain::ellipsoid(cfg.get_vec("domain", "center"),
                                       cfg.get_vec("domain", "radii"));
    if (shape == "superellipsoid")
        return ConvexDomain::superellipsoid(cfg.get_vec("domain", "center"),
                                            cfg.get_vec("domain", "radii"),
                                            cfg.get_double("domain", "exponent"));
    if (shape == "box")
        return ConvexDomain::box(cfg.get_vec("domain", "center"),
                                 cfg.get_vec("domain", "half_widths"));
    if (shape == "polytope") {
        std::vector<Vec> verts;
        std::istringstream is(cfg.get("domain", "vertices"));
        std::string group;
        while (std::getline(is, group, ';')) {
            std::istringstream gs(group);
            std::vector<double> nums;
            double v;
            while (gs >> v) nums.push_back(v);
            if (nums.empty()) continue;
            verts.push_back(Eigen::Map<const Vec>(nums.data(), long(nums.size())));
        }
        return ConvexDomain::polytope2d(std::move(verts));
    }
    fail(ErrorKind::parse_error, "unknown domain shape '" + shape + "'");
}

// Scalar component spec: "const v" | "step t0 v0 v1" | "linear a b" |
// "sin a w" | "bump a c w" | "table t0 v0 t1 v1 ...".
inline ScalarFn scalar_from_spec(const std::string& spec, const std::string& where)
{
    std::istringstream is(spec);
    std::string kind;
    is >> kind;
    std::vector<double> a;
    double v;
    while (is >> v) a.push_back(v);
    auto need = [&](size_t k) {
        require(a.size() == k, ErrorKind::parse_error,
                where + ": '" + kind + "' expects " + std::to_string(k) + " numbers");
    };
    if (kind == "const") {
        need(1);
        return constant_fn(a[0]);
    }
    if (kind == "step") {
        need(3);
        return [t0 = a[0], v0 = a[1], v1 = a[2]](double t) { return t < t0 ? v0 : v1; };
    }
    if (kind == "linear") {
        need(2);
        return [c = a[0], m = a[1]](double t) { return c + m * t; };
    }
    if (kind == "sin") {
        need(2);
        return [amp = a[0], w = a[1]](double t) { return amp * std::sin(w * t); };
    }
    if (kind == "bump") {
        need(3);
        // amplitude a, center c, half-width w; peaks at a
        return [amp = a[0], c = a[1], w = a[2]](double t) {
            double y = (t - c) / w;
            if (std::abs(y) >= 1.0) return 0.0;
            return amp * std::exp(1.0 - 1.0 / (1.0 - y * y));
        };
    }
    if (kind == "table") {
        require(a.size() >= 4 && a.size() % 2 == 0, ErrorKind::parse_error,
                where + ": table expects t v pairs");
        std::vector<double> ts, vs;
        for (size_t i = 0; i < a.size(); i += 2) {
            ts.push_back(a[i]);
            vs.push_back(a[i + 1]);
        }
        return table_fn(std::move(ts), std::move(vs));
    }
    fail(ErrorKind::parse_error, where + ": unknown component kind '" + kind + "'");
}

inline CurvatureProfile profile_from_config(const Config& cfg)
{
    if (cfg.has("curve", "profile_csv")) {
        std::string path = cfg.get("curve", "profile_csv");
        require(std::filesystem::exists(path), ErrorKind::parse_error,
                "profile_csv path does not exist: " + path);
        return read_profile_csv(path);
    }
    const int n = cfg.get_int("curve", "dim", 2);
    require(n >= 2, ErrorKind::parse_error, "[curve] dim must be >= 2");
    double length = cfg.get_double("curve", "length");
    double bound = cfg.get_double("curve", "bound", 2.0);
    std::vector<ScalarFn> front, twist;
    for (int i = 1; i < n; ++i) {
        std::string key = "kappa" + std::to_string(i);
        front.push_back(scalar_from_spec(cfg.get("curve", key, "const 0"), key));
    }
    for (int i = 1; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            std::string key = "twist" + std::to_string(i) + std::to_string(j);
            twist.push_back(scalar_from_spec(cfg.get("curve", key, "const 0"), key));
        }
    ScalarFn normal = scalar_from_spec(cfg.get("curve", "kappan", "const 0"), "kappan");
    return CurvatureProfile(n, length, bound, std::move(front), std::move(twist),
                            std::move(normal));
}

inline Mat frame_from_config(const Config& cfg, const std::string& key, int k)
{
    if (!cfg.has("curve", key) || cfg.get("curve", key) == "identity")
        return Mat::Identity(k, k);
    std::istringstream is(cfg.get("curve", key));
    std::string rowtext;
    std::vector<std::vector<double>> rows;
    while (std::getline(is, rowtext, '|')) {
        std::istringstream rs(rowtext);
        std::vector<double> row;
        double v;
        while (rs >> v) row.push_back(v);
        if (!row.empty()) rows.push_back(row);
    }
    require(int(rows.size()) == k, ErrorKind::parse_error,
            "[curve] " + key + ": expected " + std::to_string(k) + " rows");
    Mat F(k, k);
    for (int r = 0; r < k; ++r) {
        require(int(rows[r].size()) == k, ErrorKind::parse_error,
                "[curve] " + key + ": row length mismatch");
        for (int c = 0; c < k; ++c) F(r, c) = rows[r][c];
    }
    return F;
}

inline DevelopableImmersion immersion_from_config(const Config& cfg)
{
    ConvexDomain dom = domain_from_config(cfg);
    CurvatureProfile prof = profile_from_config(cfg);
    require(dom.dim() == prof.dim(), ErrorKind::parse_error,
            "domain and curve dimensions disagree");
    const int n = prof.dim();
    Vec g0 = cfg.has("curve", "origin") ? cfg.get_vec("curve", "origin") : Vec::Zero(n);
    require(g0.size() == n, ErrorKind::parse_error, "[curve] origin has wrong dimension");
    Mat F0 = frame_from_config(cfg, "frame", n);
    double step = cfg.get_double("curve", "step", 1e-3);

    FramedCurve fc = integrate_domain_frame(prof, g0, F0, step);
    Vec y0;
    Mat G0;
    default_target_seed(fc, y0, G0);
    if (cfg.has("curve", "target_origin")) y0 = cfg.get_vec("curve", "target_origin");
    if (cfg.has("curve", "target_frame")) G0 = frame_from_config(cfg, "target_frame", n + 1);
    integrate_darboux_frame(fc, y0, G0);
    return DevelopableImmersion(std::move(fc), std::move(dom));
}

// ---- commands ---------------------------------------------------------------

inline QuadratureSpec quadrature_from_config(const Config& cfg, const std::string& sec)
{
    QuadratureSpec q;
    q.t_nodes = cfg.get_int(sec, "quad_t", q.t_nodes);
    q.t_panels = cfg.get_int(sec, "quad_t_panels", q.t_panels);
    q.s_nodes = cfg.get_int(sec, "quad_s", q.s_nodes);
    q.angle_nodes = cfg.get_int(sec, "quad_angles", q.angle_nodes);
    q.radial_nodes = cfg.get_int(sec, "quad_radial", q.radial_nodes);
    return q;
}

inline int run_build(const Config& cfg, const std::string& outdir, std::ostream& diag)
{
    try {
        std::filesystem::create_directories(outdir);
        DevelopableImmersion imm = immersion_from_config(cfg);
        write_curve_csv(imm.curve(), outdir + "/curve.csv",
                        std::max(1, imm.curve().domain.cells() / 1024));

        auto rep = imm.validate(cfg.get_int("build", "validate_t", 129),
                                cfg.get_int("build", "validate_dirs", 64),
                                cfg.get_int("build", "validate_radii", 32),
                                cfg.get_int("build", "validate_inner", 1024));
        {
            std::ofstream os(outdir + "/report.txt");
            os << rep.to_text();
            if (rep.pass()) {
                auto norms = imm.sobolev_norms(quadrature_from_config(cfg, "build"));
                os << "volume = " << fmt17(norms.volume) << "\n";
                os << "u_l2_sq = " << fmt17(norms.u_sq) << "\n";
                os << "grad_l2_sq = " << fmt17(norms.grad_sq) << "\n";
                os << "hess_l2_sq = " << fmt17(norms.hess_sq) << "\n";
            }
        }
        if (!rep.pass()) {
            diag << "validation failed\n" << rep.to_text();
            if (!rep.jacobian_ok())
                diag << "jacobian witness: t = " << fmt17(rep.jac_witness_t) << ", s = ["
                     << rep.jac_witness_s.transpose() << "], J = "
                     << fmt17(rep.min_jacobian) << "\n";
            return 2;
        }
        if (cfg.has("build", "obj") && imm.dim() == 2)
            export_obj(imm, outdir + "/" + cfg.get("build", "obj"));
        if (cfg.has("build", "fields"))
            export_fields_csv(imm, outdir + "/" + cfg.get("build", "fields"));
        if (cfg.has("build", "lattice"))
            export_lattice_csv(imm, cfg.get_double("build", "lattice_h", 0.01),
                               outdir + "/" + cfg.get("build", "lattice"));
        return 0;
    } catch (const Error& e) {
        diag << e.what() << "\n";
        return exit_code_for(e);
    }
}

inline int run_smooth(const Config& cfg, const std::string& outdir, std::ostream& diag,
                      unsigned seed)
{
    try {
        std::filesystem::create_directories(outdir);
        DevelopableImmersion imm = immersion_from_config(cfg);

        SmoothingConfig sc;
        sc.seed = seed;
        if (cfg.has("smooth", "schedule")) {
            sc.schedule.clear();
            for (double v : cfg.get_list("smooth", "schedule"))
                sc.schedule.push_back(int(std::llround(v)));
        }
        std::string rho = cfg.get("smooth", "rho", "auto");
        sc.rho = (rho == "auto") ? 0.0 : cfg.get_double("smooth", "rho");
        sc.sphere_grid = cfg.get_int("smooth", "sphere_grid", 0);
        sc.cutoff_steepness = cfg.get_double("smooth", "cutoff_steepness", 1.0);
        sc.step = cfg.get_double("curve", "step", 1e-3);
        sc.mc_samples = cfg.get_int("smooth", "mc_samples", 20000);
        sc.quad = quadrature_from_config(cfg, "smooth");
        if (!cfg.has("smooth", "quad_t_panels")) sc.quad.t_panels = 16;

        SmoothingResult res = run_smoothing(imm, sc);

        for (const auto& [rec, um] : res.stages) {
            char sub[32];
            std::snprintf(sub, sizeof sub, "/m_%04d", rec.m);
            std::string dir = outdir + sub;
            std::filesystem::create_directories(dir);
            write_profile_csv(rec.mollified, dir + "/profile_mollified.csv");
            write_profile_csv(rec.flattened, dir + "/profile_flattened.csv");
            write_profile_csv(um.curve().profile, dir + "/profile_final.csv");
            {
                std::vector<std::vector<double>> rows;
                for (size_t k = 0; k < rec.lambda.size(); ++k)
                    rows.push_back({rec.Gamma.domain.t[k], rec.lambda[k]});
                write_csv(dir + "/lambda.csv", {"t", "lambda"}, rows);
            }
            {
                std::vector<std::vector<double>> rows;
                for (size_t k = 0; k < rec.verify_t.size(); ++k)
                    rows.push_back({rec.verify_t[k], rec.verify_product[k],
                                    rec.verify_minj[k]});
                write_csv(dir + "/verification.csv",
                          {"t", "margin_product", "min_jacobian"}, rows);
            }
            write_curve_csv(um.curve(), dir + "/curve.csv",
                            std::max(1, um.curve().domain.cells() / 1024));
            std::ofstream os(dir + "/stage.txt");
            os << "m = " << rec.m << "\n";
            os << "rho = " << fmt17(rec.rho) << "\n";
            os << "ell_star = " << fmt17(rec.ell_star) << "\n";
            os << "flatten_inequality_max = " << fmt17(rec.step1_margin) << "\n";
            os << "smooth_inequality_max = " << fmt17(rec.step4_margin) << "\n";
            os << "final_inequality_max = " << fmt17(rec.step5_margin) << "\n";
            os << "remollify_width = " << fmt17(rec.remollify_width) << "\n";
            os << "jacobian_floor = " << fmt17(rec.jacobian_floor) << "\n";
            os << "required_floor = " << fmt17(rec.required_floor) << "\n";
            os << "lambda_jump_rate = " << fmt17(rec.lambda_jump_rate) << "\n";
            os << "sphere_grid = " << rec.sphere_count << "\n";
        }

        std::vector<std::vector<double>> rows;
        for (const auto& r : res.report.rows)
            rows.push_back({double(r.m), r.err_val_sq, r.err_grad_sq, r.err_hess_sq,
                            r.total(), r.sliver_volume, r.min_jacobian, r.margin});
        write_csv(outdir + "/convergence.csv",
                  {"m", "err_val_sq", "err_grad_sq", "err_hess_sq", "err_total",
                   "sliver_volume", "min_jacobian", "margin"},
                  rows);
        std::ofstream os(outdir + "/summary.txt");
        os << "rho = " << fmt17(res.rho) << "\n";
        os << "stages = " << res.stages.size() << "\n";
        os << "error_strictly_decreasing = "
           << (res.report.strictly_decreasing ? "yes" : "no") << "\n";
        for (const auto& r : res.report.rows)
            os << "m " << r.m << ": w22_error_sq = " << fmt17(r.total())
               << ", min_jacobian = " << fmt17(r.min_jacobian)
               << ", margin = " << fmt17(r.margin) << "\n";
        return 0;
    } catch (const Error& e) {
        diag << e.what() << "\n";
        return exit_code_for(e);
    }
}

inline int run_analyze(const Config& cfg, const std::string& outdir, std::ostream& diag)
{
    try {
        std::filesystem::create_directories(outdir);
        std::string input = cfg.get("analyze", "input");
        require(std::filesystem::exists(input), ErrorKind::parse_error,
                "analyze input does not exist: " + input);
        SampledMap m = read_lattice_csv(input);

        FieldEstimate fe = estimate_fields(m);
        ResidualField rf = isometry_residual(m, fe);
        NormalField nf = normal_field(m, fe);
        SecondFormField sf = second_form_field(m, fe, nf);

        // Ruling detection requires a near-isometric sample; maps with
        // genuine singularities (the probe's natural inputs) skip it.
        RulingPartition rp;
        std::string detect_note;
        try {
            rp = detect_rulings(m, fe, rf, sf, cfg.get_double("analyze", "angular_tol", 2e-2));
        } catch (const Error& e) {
            if (e.kind != ErrorKind::precondition_violation) throw;
            detect_note = e.what();
            rp.label.assign(m.node_count, NodeLabel::noisy);
            rp.cluster.assign(m.node_count, -1);
            rp.direction.assign(m.node_count * m.n, 0.0);
        }

        // label CSV: coordinates, label, cluster, plane normal
        {
            std::vector<std::string> h;
            for (int i = 0; i < m.n; ++i) h.push_back("x" + std::to_string(i));
            h.insert(h.end(), {"label", "cluster"});
            for (int i = 0; i < m.n; ++i) h.push_back("nrm" + std::to_string(i));
            h.push_back("Anorm");
            std::vector<std::vector<double>> rows;
            m.for_nodes([&](const std::vector<int>& idx, int32_t s) {
                Vec x = m.coord(idx);
                std::vector<double> row;
                for (int i = 0; i < m.n; ++i) row.push_back(x[i]);
                row.push_back(double(int(rp.label[s])));
                row.push_back(double(rp.cluster[s]));
                for (int i = 0; i < m.n; ++i) row.push_back(rp.direction[long(s) * m.n + i]);
                row.push_back(sf.at(s, m.n).norm());
                rows.push_back(std::move(row));
            });
            write_csv(outdir + "/labels.csv", h, rows);
        }

        {
            std::ofstream os(outdir + "/partition.txt");
            os << "nodes = " << m.node_count << "\n";
            os << "h = " << fmt17(m.h) << "\n";
            os << "max_isometry_residual = " << fmt17(rf.max_interior) << "\n";
            os << "max_symmetry_defect = " << fmt17(sf.max_sym_defect) << "\n";
            os << "max_2x2_minor = " << fmt17(sf.max_minor) << "\n";
            os << "max_codazzi_defect = " << fmt17(sf.max_codazzi) << "\n";
            if (!detect_note.empty()) os << "ruling_detection = skipped (" << detect_note << ")\n";
            os << "tau_flat = " << fmt17(rp.tau_flat) << "\n";
            os << "tau_ruling = " << fmt17(rp.tau_ruling) << "\n";
            os << "bodies = " << rp.bodies.size() << "\n";
            for (const auto& b : rp.bodies)
                os << "  body " << b.id << ": nodes = " << b.nodes
                   << ", adjacent_planes = " << b.adjacent_planes
                   << ", proper = " << (b.proper ? "yes" : "no") << "\n";
            os << "ruled_clusters = " << rp.planes.size() << "\n";
            for (const auto& p : rp.planes) {
                os << "  cluster " << p.id << ": nodes = " << p.nodes << ", normal = [";
                for (int i = 0; i < p.mean_normal.size(); ++i)
                    os << (i ? " " : "") << fmt17(p.mean_normal[i]);
                os << "]\n";
            }
        }

        if (cfg.has("analyze", "probe_p")) {
            Vec apex = cfg.has("analyze", "probe_apex") ? cfg.get_vec("analyze", "probe_apex")
                                                        : Vec::Zero(m.n);
            auto eps = cfg.get_list("analyze", "probe_eps");
            std::vector<std::string> h{"p"};
            size_t cols = eps.size();
            for (size_t k = 0; k < cols; ++k) h.push_back("I_eps" + std::to_string(k));
            h.push_back("verdict"); // 1 converges, 0 diverges
            std::vector<std::vector<double>> rows;
            std::ofstream os(outdir + "/probe.txt");
            for (double p : cfg.get_list("analyze", "probe_p")) {
                ProbeResult pr = sharpness_probe(m, fe, apex, p, eps);
                std::vector<double> row{p};
                for (double v : pr.integral) row.push_back(v);
                row.push_back(pr.verdict == "converges" ? 1.0 : 0.0);
                rows.push_back(std::move(row));
                os << "p = " << fmt17(p) << ": " << pr.verdict << "; ratios =";
                for (double r : pr.ratios) os << " " << fmt17(r);
                os << "\n";
            }
            write_csv(outdir + "/probe.csv", h, rows);
        }
        return 0;
    } catch (const Error& e) {
        diag << e.what() << "\n";
        return exit_code_for(e);
    }
}

} // namespace devim
