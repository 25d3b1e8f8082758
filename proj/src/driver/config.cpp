#include "elastipinn/driver/config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "elastipinn/data/manufactured.hpp"
#include "elastipinn/driver/presets.hpp"

namespace elastipinn::driver {

using nlohmann::json;

namespace {

// Reads one JSON object, remembering which keys were consumed so that the
// rest can be reported as unknown.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail("expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    const json* raw(const std::string& key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    Reader child(const std::string& key) {
        const json* v = raw(key);
        static const json empty = json::object();
        if (!v) return Reader(empty, at(key));
        return Reader(*v, at(key));
    }

    double number(const std::string& key, double def) {
        const json* v = raw(key);
        if (!v) return def;
        if (!v->is_number()) fail_key(key, "expected a number");
        return v->get<double>();
    }

    long integer(const std::string& key, long def) {
        const json* v = raw(key);
        if (!v) return def;
        if (!v->is_number_integer()) fail_key(key, "expected an integer");
        return v->get<long>();
    }

    bool boolean(const std::string& key, bool def) {
        const json* v = raw(key);
        if (!v) return def;
        if (!v->is_boolean()) fail_key(key, "expected true or false");
        return v->get<bool>();
    }

    std::string string(const std::string& key, const std::string& def) {
        const json* v = raw(key);
        if (!v) return def;
        if (!v->is_string()) fail_key(key, "expected a string");
        return v->get<std::string>();
    }

    // A number or an array of numbers.
    std::vector<double> numbers(const std::string& key, const std::vector<double>& def) {
        const json* v = raw(key);
        if (!v) return def;
        if (v->is_number()) return {v->get<double>()};
        if (!v->is_array() || v->empty()) fail_key(key, "expected a number or a non-empty array of numbers");
        std::vector<double> out;
        for (const auto& e : *v) {
            if (!e.is_number()) fail_key(key, "expected a number or a non-empty array of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    std::vector<int> ints(const std::string& key, const std::vector<int>& def) {
        const json* v = raw(key);
        if (!v) return def;
        if (!v->is_array()) fail_key(key, "expected an array of integers");
        std::vector<int> out;
        for (const auto& e : *v) {
            if (!e.is_number_integer()) fail_key(key, "expected an array of integers");
            out.push_back(e.get<int>());
        }
        return out;
    }

    // Rejects keys that no parser asked for.
    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) fail("unknown key '" + it.key() + "'");
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ConfigError((path_.empty() ? std::string("config") : path_) + ": " + msg);
    }
    [[noreturn]] void fail_key(const std::string& key, const std::string& msg) const {
        throw ConfigError(at(key) + ": " + msg);
    }
    std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

std::string fiber_kind_name(const mech::FiberFrame& f) {
    return f.kind == mech::FiberFrame::Kind::Constant ? "constant" : "linear-in-z";
}

json fiber_to_json(const mech::FiberFrame& f) {
    return {{"kind", fiber_kind_name(f)},
            {"angle_bottom_deg", f.angle_bottom_deg},
            {"angle_top_deg", f.angle_top_deg},
            {"height", f.height}};
}

mech::FiberFrame fiber_from(Reader r) {
    mech::FiberFrame f;
    const std::string kind = r.string("kind", "constant");
    if (kind == "constant")
        f.kind = mech::FiberFrame::Kind::Constant;
    else if (kind == "linear-in-z")
        f.kind = mech::FiberFrame::Kind::LinearInZ;
    else
        r.fail_key("kind", "expected 'constant' or 'linear-in-z'");
    f.angle_bottom_deg = r.number("angle_bottom_deg", f.angle_bottom_deg);
    f.angle_top_deg = r.number("angle_top_deg", f.angle_top_deg);
    f.height = r.number("height", f.height);
    r.finish();
    if (!(f.height > 0.0)) r.fail_key("height", "must be > 0");
    return f;
}

mech::MaterialModel default_material(mech::Law law) {
    mech::MaterialModel m;
    switch (law) {
        case mech::Law::NeoHookean:
            m.law = mech::NeoHookean{};
            break;
        case mech::Law::Guccione:
            m.law = mech::Guccione{};
            break;
        case mech::Law::HolzapfelOgden1F:
            m.law = mech::HolzapfelOgden1F{};
            break;
    }
    return m;
}

json material_to_json(const mech::MaterialModel& m) {
    json p = json::object();
    const auto& names = mech::parameter_names(m.kind());
    const Eigen::VectorXd v = mech::parameters(m);
    for (std::size_t i = 0; i < names.size(); ++i) p[names[i]] = v[static_cast<Eigen::Index>(i)];
    return {{"law", mech::law_name(m.kind())}, {"parameters", p}, {"fiber", fiber_to_json(m.fiber)}};
}

// Reads law, parameters and fibre from r without finishing it.
mech::MaterialModel material_from(Reader& r) {
    mech::Law law;
    try {
        law = mech::law_from_name(r.string("law", "neo-hookean"));
    } catch (const std::invalid_argument& e) {
        r.fail_key("law", e.what());
    }
    mech::MaterialModel m = default_material(law);
    Eigen::VectorXd v = mech::parameters(m);
    Reader pr = r.child("parameters");
    const auto& names = mech::parameter_names(law);
    for (std::size_t i = 0; i < names.size(); ++i)
        v[static_cast<Eigen::Index>(i)] = pr.number(names[i], v[static_cast<Eigen::Index>(i)]);
    pr.finish();
    m = mech::with_parameters(m, v);
    m.fiber = fiber_from(r.child("fiber"));
    try {
        mech::validate(m);
    } catch (const std::invalid_argument& e) {
        r.fail_key("parameters", e.what());
    }
    return m;
}

json stiffness_to_json(const std::optional<sampling::StiffnessField>& f) {
    if (!f) return nullptr;
    if (const auto* c = std::get_if<sampling::ConstantField>(&*f)) return {{"kind", "constant"}, {"mu", c->mu}};
    if (const auto* t = std::get_if<sampling::TwoRegionField>(&*f))
        return {{"kind", "two-region"}, {"mu_l", t->mu_l}, {"mu_r", t->mu_r}, {"split", t->split}};
    if (const auto* s = std::get_if<sampling::ScarSpheresField>(&*f))
        return {{"kind", "scar"},
                {"background", s->background},
                {"center", {s->center[0], s->center[1], s->center[2]}},
                {"radii", s->radii},
                {"values", s->values}};
    throw ConfigError("truth.stiffness: a network field cannot be a ground truth");
}

std::optional<sampling::StiffnessField> stiffness_from(const json* j, const std::string& path) {
    if (!j || j->is_null()) return std::nullopt;
    Reader r(*j, path);
    const std::string kind = r.string("kind", "");
    auto triple = [&](const std::string& key, std::array<double, 3> def) {
        const std::vector<double> v = r.numbers(key, {def[0], def[1], def[2]});
        if (v.size() != 3) r.fail_key(key, "expected three numbers");
        return std::array<double, 3>{v[0], v[1], v[2]};
    };
    sampling::StiffnessField out;
    if (kind == "constant") {
        out = sampling::ConstantField{r.number("mu", 10.0)};
    } else if (kind == "two-region") {
        sampling::TwoRegionField t;
        t.mu_l = r.number("mu_l", t.mu_l);
        t.mu_r = r.number("mu_r", t.mu_r);
        t.split = r.number("split", t.split);
        if (!(t.mu_l > 0.0 && t.mu_r > 0.0)) r.fail("region stiffness values must be > 0");
        out = t;
    } else if (kind == "scar") {
        sampling::ScarSpheresField s;
        s.background = r.number("background", s.background);
        const auto c = triple("center", {s.center[0], s.center[1], s.center[2]});
        s.center = Eigen::Vector3d(c[0], c[1], c[2]);
        s.radii = triple("radii", s.radii);
        s.values = triple("values", s.values);
        if (!(s.radii[0] > 0.0 && s.radii[0] < s.radii[1] && s.radii[1] < s.radii[2]))
            r.fail_key("radii", "must be positive and strictly ascending");
        if (!(s.background > 0.0 && s.values[0] > 0.0 && s.values[1] > 0.0 && s.values[2] > 0.0))
            r.fail("stiffness values must be > 0");
        out = s;
    } else {
        r.fail_key("kind", "expected 'constant', 'two-region' or 'scar'");
    }
    r.finish();
    return out;
}

std::string source_name(DataSource s) { return s == DataSource::Manufactured ? "manufactured" : "fem-import"; }
std::string layout_name(ObservationLayout l) { return l == ObservationLayout::Random ? "random" : "lattice"; }

template <typename F>
auto guard(const std::string& path, F&& f) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

}  // namespace

void ExperimentConfig::validate() const {
    guard("geometry", [&] { geometry.validate(); return 0; });
    if (!std::isfinite(pressure)) throw ConfigError("loading.pressure: must be finite");
    if (!(robin_k >= 0.0)) throw ConfigError("loading.robin_k: must be >= 0");
    guard("truth", [&] { mech::validate(truth.material); return 0; });
    guard("model", [&] { mech::validate(model); return 0; });
    guard("parametrization", [&] { param.validate(model.kind()); return 0; });
    guard("prior", [&] { prior.validate(); return 0; });
    guard("weights", [&] { weights.validate(); return 0; });
    guard("sampling", [&] { sampling.validate(); return 0; });
    guard("schedule", [&] { schedule.validate(); return 0; });

    if (truth.stiffness && std::holds_alternative<sampling::NetworkField>(*truth.stiffness))
        throw ConfigError("truth.stiffness: a network field cannot be a ground truth");
    if (param.mode == loss::StiffnessMode::TwoRegion &&
        !(param.split > 0.0 && param.split < geometry.L))
        throw ConfigError("parametrization.split: must lie inside the slab");
    if (param.mode == loss::StiffnessMode::Global && param.scalars.empty())
        throw ConfigError("parametrization.scalars: global mode needs at least one trainable scalar");

    if (data.source == DataSource::Manufactured) {
        const auto names = data::QuadraticDisplacement::preset_names();
        if (std::find(names.begin(), names.end(), data.displacement) == names.end())
            throw ConfigError("data.displacement: unknown manufactured displacement '" + data.displacement + "'");
    } else {
        if (data.fem_path.empty()) throw ConfigError("data.fem_path: required for fem-import");
        if (data.layout != ObservationLayout::Random)
            throw ConfigError("data.layout: fem-import data is used as given ('random')");
    }
    if (data.layout == ObservationLayout::Lattice && !(data.lattice_spacing > 0.0))
        throw ConfigError("data.lattice_spacing: must be > 0");
    if (data.pixel_spacing < 0.0) throw ConfigError("data.pixel_spacing: must be >= 0");
    if (data.pixel_spacing > 0.0 && data.layout != ObservationLayout::Lattice)
        throw ConfigError("data.pixel_spacing: downsampling needs the lattice layout");
    if (weights.obs_e > 0.0 && !data.strain)
        throw ConfigError("weights.obs_e: strain weight is set but data.strain is false");

    if (network.hidden.empty()) throw ConfigError("network.hidden: needs at least one layer");
    for (int h : network.hidden)
        if (h < 1) throw ConfigError("network.hidden: widths must be >= 1");
    if (network.fourier) {
        if (network.fourier_m < 1) throw ConfigError("network.fourier.m: must be >= 1");
        for (double s : network.fourier_sigmas)
            if (!(s > 0.0)) throw ConfigError("network.fourier.sigma: must be > 0");
    }
    if (network.fourier_sigmas.empty()) throw ConfigError("network.fourier.sigma: needs at least one value");

    if (noise_ld.empty()) throw ConfigError("noise.ld: needs at least one value");
    for (double ld : noise_ld)
        if (!(ld >= 0.0) || !std::isfinite(ld)) throw ConfigError("noise.ld: values must be >= 0");
    if (seeds.empty()) throw ConfigError("seeds: needs at least one seed");
    for (std::size_t i = 0; i < seeds.size(); ++i)
        for (std::size_t k = i + 1; k < seeds.size(); ++k)
            if (seeds[i] == seeds[k]) throw ConfigError("seeds: duplicate seed " + std::to_string(seeds[i]));
    if (logging.log_every < 1) throw ConfigError("logging.log_every: must be >= 1");
    if (logging.test_every < 0) throw ConfigError("logging.test_every: must be >= 0");
    if (logging.checkpoint_every < 0) throw ConfigError("logging.checkpoint_every: must be >= 0");
    if (exports.lattice_spacing < 0.0) throw ConfigError("export.lattice_spacing: must be >= 0");
}

json to_json(const ExperimentConfig& c) {
    json j;
    j["name"] = c.name;
    j["description"] = c.description;
    j["geometry"] = {{"L", c.geometry.L}, {"W", c.geometry.W}, {"H", c.geometry.H}};
    j["loading"] = {{"pressure", c.pressure}, {"robin_k", c.robin_k}};

    j["truth"] = material_to_json(c.truth.material);
    j["truth"]["stiffness"] = stiffness_to_json(c.truth.stiffness);

    j["data"] = {{"source", source_name(c.data.source)},
                 {"displacement", c.data.displacement},
                 {"fem_path", c.data.fem_path},
                 {"layout", layout_name(c.data.layout)},
                 {"lattice_spacing", c.data.lattice_spacing},
                 {"pixel_spacing", c.data.pixel_spacing},
                 {"strain", c.data.strain}};

    j["model"] = material_to_json(c.model);
    j["model"]["pde_form"] = std::string(loss::pde_form_name(c.pde_form));

    json scalars = json::array();
    for (const auto& s : c.param.scalars) scalars.push_back({{"name", s.name}, {"init", s.init}});
    j["parametrization"] = {{"mode", std::string(loss::stiffness_mode_name(c.param.mode))},
                            {"scalars", scalars},
                            {"split", c.param.split},
                            {"region_init", c.param.region_init},
                            {"mu_net", {{"hidden", c.param.mu_spec.hidden}}},
                            {"mu_ref", c.param.mu_ref},
                            {"softplus", c.param.softplus}};
    j["prior"] = {{"enabled", c.prior.enabled}, {"mu", c.prior.mu}};

    json sig = c.network.fourier_sigmas.size() == 1 ? json(c.network.fourier_sigmas.front())
                                                    : json(c.network.fourier_sigmas);
    j["network"] = {{"hidden", c.network.hidden},
                    {"fourier", {{"enabled", c.network.fourier}, {"m", c.network.fourier_m}, {"sigma", sig}}}};

    j["sampling"] = {{"n_obs", c.sampling.n_obs},
                     {"n_pde", c.sampling.n_pde},
                     {"n_bc_lateral", c.sampling.n_bc_lateral},
                     {"n_bc_topbottom", c.sampling.n_bc_topbottom}};
    j["noise"] = {{"ld", c.noise_ld.size() == 1 ? json(c.noise_ld.front()) : json(c.noise_ld)}};

    json w;
    for (loss::Term t : loss::kAllTerms) w[std::string(loss::term_name(t))] = c.weights[t];
    w["inferred"] = c.weights_inferred;
    j["weights"] = w;

    const auto& s = c.schedule;
    j["schedule"] = {{"mode", s.adam_only ? "adam-only" : "two-phase"},
                     {"pretrain_adam", s.pre_adam},
                     {"pretrain_bfgs_max", s.pre_bfgs_max},
                     {"pretrain_tol", s.pre_tol},
                     {"adam", s.adam},
                     {"bfgs", s.bfgs},
                     {"adam_only_epochs", s.adam_only_epochs},
                     {"adam_lr", s.adam_cfg.lr},
                     {"adam_beta1", s.adam_cfg.beta1},
                     {"adam_beta2", s.adam_cfg.beta2},
                     {"adam_eps", s.adam_cfg.eps},
                     {"bfgs_tol_grad", s.bfgs_cfg.tol_grad},
                     {"bfgs_max_linesearch", s.bfgs_cfg.max_linesearch},
                     {"bfgs_dense_limit", s.bfgs_cfg.dense_limit},
                     {"bfgs_history", s.bfgs_cfg.history},
                     {"bfgs_refine", s.bfgs_cfg.refine}};
    j["seeds"] = c.seeds;
    j["logging"] = {{"log_every", c.logging.log_every},
                    {"test_every", c.logging.test_every},
                    {"checkpoint_every", c.logging.checkpoint_every}};
    j["export"] = {{"lattice_spacing", c.exports.lattice_spacing}};
    j["output"] = {{"dir", c.output_dir}};
    j["deterministic"] = c.deterministic;
    return j;
}

ExperimentConfig config_from_json(const json& doc) {
    ExperimentConfig c;
    Reader r(doc, "");
    c.name = r.string("name", c.name);
    c.description = r.string("description", c.description);

    {
        Reader g = r.child("geometry");
        c.geometry.L = g.number("L", c.geometry.L);
        c.geometry.W = g.number("W", c.geometry.W);
        c.geometry.H = g.number("H", c.geometry.H);
        g.finish();
    }
    {
        Reader l = r.child("loading");
        c.pressure = l.number("pressure", c.pressure);
        c.robin_k = l.number("robin_k", c.robin_k);
        l.finish();
    }
    {
        Reader t = r.child("truth");
        c.truth.material = material_from(t);
        c.truth.stiffness = stiffness_from(t.raw("stiffness"), "truth.stiffness");
        t.finish();
    }
    {
        Reader d = r.child("data");
        const std::string src = d.string("source", "manufactured");
        if (src == "manufactured")
            c.data.source = DataSource::Manufactured;
        else if (src == "fem-import")
            c.data.source = DataSource::FemImport;
        else
            d.fail_key("source", "expected 'manufactured' or 'fem-import'");
        c.data.displacement = d.string("displacement", c.data.displacement);
        c.data.fem_path = d.string("fem_path", c.data.fem_path);
        const std::string layout = d.string("layout", "random");
        if (layout == "random")
            c.data.layout = ObservationLayout::Random;
        else if (layout == "lattice")
            c.data.layout = ObservationLayout::Lattice;
        else
            d.fail_key("layout", "expected 'random' or 'lattice'");
        c.data.lattice_spacing = d.number("lattice_spacing", c.data.lattice_spacing);
        c.data.pixel_spacing = d.number("pixel_spacing", c.data.pixel_spacing);
        c.data.strain = d.boolean("strain", c.data.strain);
        d.finish();
    }
    {
        Reader m = r.child("model");
        if (!r.has("model")) {
            c.model = c.truth.material;
        } else {
            c.model = material_from(m);
        }
        const std::string form = m.string("pde_form", "divergence");
        c.pde_form = guard("model.pde_form", [&] { return loss::pde_form_from_name(form); });
        m.finish();
    }
    {
        Reader p = r.child("parametrization");
        const std::string mode = p.string("mode", "global");
        c.param.mode = guard("parametrization.mode", [&] { return loss::stiffness_mode_from_name(mode); });
        if (const json* sc = p.raw("scalars")) {
            if (!sc->is_array()) p.fail_key("scalars", "expected an array");
            for (std::size_t i = 0; i < sc->size(); ++i) {
                Reader s((*sc)[i], "parametrization.scalars[" + std::to_string(i) + "]");
                loss::TrainableScalar ts;
                ts.name = s.string("name", "");
                ts.init = s.number("init", ts.init);
                s.finish();
                c.param.scalars.push_back(ts);
            }
        }
        c.param.split = p.number("split", c.param.split);
        const std::vector<double> ri = p.numbers("region_init", {c.param.region_init[0], c.param.region_init[1]});
        if (ri.size() != 2) p.fail_key("region_init", "expected two numbers");
        c.param.region_init = {ri[0], ri[1]};
        {
            Reader mn = p.child("mu_net");
            c.param.mu_spec.hidden = mn.ints("hidden", c.param.mu_spec.hidden);
            mn.finish();
        }
        c.param.mu_ref = p.number("mu_ref", c.param.mu_ref);
        c.param.softplus = p.boolean("softplus", c.param.softplus);
        p.finish();
    }
    {
        Reader p = r.child("prior");
        c.prior.enabled = p.boolean("enabled", c.prior.enabled);
        c.prior.mu = p.number("mu", c.prior.mu);
        p.finish();
    }
    {
        Reader n = r.child("network");
        c.network.hidden = n.ints("hidden", c.network.hidden);
        Reader f = n.child("fourier");
        c.network.fourier = f.boolean("enabled", c.network.fourier);
        c.network.fourier_m = static_cast<int>(f.integer("m", c.network.fourier_m));
        c.network.fourier_sigmas = f.numbers("sigma", c.network.fourier_sigmas);
        f.finish();
        n.finish();
    }
    {
        Reader s = r.child("sampling");
        c.sampling.n_obs = static_cast<int>(s.integer("n_obs", c.sampling.n_obs));
        c.sampling.n_pde = static_cast<int>(s.integer("n_pde", c.sampling.n_pde));
        c.sampling.n_bc_lateral = static_cast<int>(s.integer("n_bc_lateral", c.sampling.n_bc_lateral));
        c.sampling.n_bc_topbottom = static_cast<int>(s.integer("n_bc_topbottom", c.sampling.n_bc_topbottom));
        s.finish();
    }
    {
        Reader n = r.child("noise");
        c.noise_ld = n.numbers("ld", c.noise_ld);
        n.finish();
    }
    {
        Reader w = r.child("weights");
        for (loss::Term t : loss::kAllTerms) c.weights[t] = w.number(std::string(loss::term_name(t)), c.weights[t]);
        c.weights_inferred = w.boolean("inferred", c.weights_inferred);
        w.finish();
    }
    {
        Reader s = r.child("schedule");
        auto& sc = c.schedule;
        const std::string mode = s.string("mode", "two-phase");
        if (mode == "two-phase")
            sc.adam_only = false;
        else if (mode == "adam-only")
            sc.adam_only = true;
        else
            s.fail_key("mode", "expected 'two-phase' or 'adam-only'");
        sc.pre_adam = s.integer("pretrain_adam", sc.pre_adam);
        sc.pre_bfgs_max = s.integer("pretrain_bfgs_max", sc.pre_bfgs_max);
        sc.pre_tol = s.number("pretrain_tol", sc.pre_tol);
        sc.adam = s.integer("adam", sc.adam);
        sc.bfgs = s.integer("bfgs", sc.bfgs);
        sc.adam_only_epochs = s.integer("adam_only_epochs", sc.adam_only_epochs);
        sc.adam_cfg.lr = s.number("adam_lr", sc.adam_cfg.lr);
        sc.adam_cfg.beta1 = s.number("adam_beta1", sc.adam_cfg.beta1);
        sc.adam_cfg.beta2 = s.number("adam_beta2", sc.adam_cfg.beta2);
        sc.adam_cfg.eps = s.number("adam_eps", sc.adam_cfg.eps);
        sc.bfgs_cfg.tol_grad = s.number("bfgs_tol_grad", sc.bfgs_cfg.tol_grad);
        sc.bfgs_cfg.max_linesearch = static_cast<int>(s.integer("bfgs_max_linesearch", sc.bfgs_cfg.max_linesearch));
        sc.bfgs_cfg.dense_limit = s.integer("bfgs_dense_limit", sc.bfgs_cfg.dense_limit);
        sc.bfgs_cfg.history = static_cast<int>(s.integer("bfgs_history", sc.bfgs_cfg.history));
        sc.bfgs_cfg.refine = s.boolean("bfgs_refine", sc.bfgs_cfg.refine);
        s.finish();
    }
    if (const json* sd = r.raw("seeds")) {
        if (!sd->is_array()) r.fail_key("seeds", "expected an array of non-negative integers");
        c.seeds.clear();
        for (const auto& e : *sd) {
            if (!e.is_number_unsigned()) r.fail_key("seeds", "expected an array of non-negative integers");
            c.seeds.push_back(e.get<std::uint64_t>());
        }
    }
    {
        Reader l = r.child("logging");
        c.logging.log_every = l.integer("log_every", c.logging.log_every);
        c.logging.test_every = l.integer("test_every", c.logging.test_every);
        c.logging.checkpoint_every = l.integer("checkpoint_every", c.logging.checkpoint_every);
        l.finish();
    }
    {
        Reader e = r.child("export");
        c.exports.lattice_spacing = e.number("lattice_spacing", c.exports.lattice_spacing);
        e.finish();
    }
    {
        Reader o = r.child("output");
        c.output_dir = o.string("dir", c.output_dir);
        o.finish();
    }
    c.deterministic = r.boolean("deterministic", c.deterministic);
    r.finish();
    c.validate();
    return c;
}

void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "': expected key=value");
    const std::string path = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);

    json value;
    try {
        value = json::parse(text);
    } catch (const json::parse_error&) {
        value = text;  // bare word
    }

    json* node = &doc;
    std::string walked;
    std::stringstream ss(path);
    std::string key;
    std::vector<std::string> keys;
    while (std::getline(ss, key, '.')) keys.push_back(key);
    if (keys.empty()) throw ConfigError("override '" + assignment + "': empty key");
    for (std::size_t i = 0; i < keys.size(); ++i) {
        const std::string& k = keys[i];
        if (k.empty()) throw ConfigError("override '" + path + "': empty path component");
        if (!node->is_object() || !node->contains(k))
            throw ConfigError("override '" + path + "': unknown key '" + (walked.empty() ? k : walked + "." + k) + "'");
        walked = walked.empty() ? k : walked + "." + k;
        node = &(*node)[k];
    }
    *node = value;
}

ExperimentConfig load_config(const std::string& name_or_path, const std::vector<std::string>& overrides) {
    json doc;
    namespace fs = std::filesystem;
    if (fs::is_regular_file(name_or_path)) {
        std::ifstream in(name_or_path);
        if (!in) throw ConfigError("cannot open config file '" + name_or_path + "'");
        try {
            doc = json::parse(in);
        } catch (const json::parse_error& e) {
            throw ConfigError(name_or_path + ": " + e.what());
        }
        // Files may be partial; canonicalize so that overrides see every key.
        doc = to_json(config_from_json(doc));
    } else {
        std::string name = name_or_path;
        if (fs::path(name).extension() == ".json") name = fs::path(name).stem().string();
        if (!is_preset(name))
            throw ConfigError("'" + name_or_path + "' is neither a readable config file nor a preset name");
        doc = to_json(preset(name));
    }
    for (const auto& o : overrides) apply_override(doc, o);
    return config_from_json(doc);
}

}  // namespace elastipinn::driver
