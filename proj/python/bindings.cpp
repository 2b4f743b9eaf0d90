#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fcaloha/capture.hpp"
#include "fcaloha/density_evolution.hpp"
#include "fcaloha/model.hpp"
#include "fcaloha/simulator.hpp"
#include "fcaloha/sweep.hpp"

namespace py = pybind11;
using namespace fcaloha;

namespace {

DeResult fixed_point(double beta, double load, const CaptureTable& table) {
    DeConfig c;
    c.beta = beta;
    c.epsilon = load - 1.0;
    c.table = table;
    return iterate_to_fixed_point(c);
}

py::dict summary_dict(const BatchSummary& s) {
    auto pair = [](const MeanWithError& m) { return py::make_tuple(m.mean, m.std_error); };
    py::dict d;
    d["runs"] = s.runs;
    d["throughput"] = pair(s.throughput);
    d["fraction_resolved"] = pair(s.fraction_resolved);
    d["load"] = pair(s.load);
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Frameless ALOHA with capture: density evolution and Monte-Carlo simulation";

    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const std::invalid_argument& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        }
    });

    py::enum_<SnrMode>(m, "SnrMode")
        .value("PerUserFixed", SnrMode::PerUserFixed)
        .value("PerTransmission", SnrMode::PerTransmission);

    py::enum_<Reception>(m, "Reception")
        .value("Capture", Reception::Capture)
        .value("CollisionOnly", Reception::CollisionOnly);

    py::enum_<Termination>(m, "Termination")
        .value("FractionThreshold", Termination::FractionThreshold)
        .value("ThroughputThreshold", Termination::ThroughputThreshold)
        .value("AllResolved", Termination::AllResolved)
        .value("SlotCap", Termination::SlotCap);

    py::class_<SystemParams>(m, "SystemParams")
        .def(py::init<>())
        .def_readwrite("n_users", &SystemParams::n_users)
        .def_readwrite("beta", &SystemParams::beta)
        .def_readwrite("capture_ratio", &SystemParams::capture_ratio)
        .def_readwrite("mean_snr", &SystemParams::mean_snr)
        .def_readwrite("threshold_v", &SystemParams::threshold_v)
        .def_readwrite("threshold_s", &SystemParams::threshold_s)
        .def_readwrite("max_slots", &SystemParams::max_slots)
        .def_readwrite("base_seed", &SystemParams::base_seed)
        .def_readwrite("snr_mode", &SystemParams::snr_mode)
        .def("validate", &SystemParams::validate);

    py::class_<ChannelParams>(m, "ChannelParams")
        .def(py::init([](double b, double mean_snr, Reception r) { return ChannelParams{b, mean_snr, r}; }),
             py::arg("capture_ratio") = 1.0, py::arg("mean_snr") = 10.0, py::arg("reception") = Reception::Capture)
        .def_static("from_ratio", &ChannelParams::from_ratio, py::arg("b"), py::arg("snr_ratio"),
                    py::arg("reception") = Reception::Capture)
        .def_static("collision_only", &ChannelParams::collision_only)
        .def_readwrite("capture_ratio", &ChannelParams::capture_ratio)
        .def_readwrite("mean_snr", &ChannelParams::mean_snr)
        .def_readwrite("reception", &ChannelParams::reception)
        .def_property_readonly("snr_ratio", &ChannelParams::snr_ratio);

    py::class_<CaptureTable>(m, "CaptureTable")
        .def_readonly("channel", &CaptureTable::channel)
        .def_readonly("pi", &CaptureTable::pi)
        .def_readonly("std_error", &CaptureTable::std_error)
        .def_readonly("samples_per_entry", &CaptureTable::samples_per_entry)
        .def_readonly("seed", &CaptureTable::seed)
        .def_property_readonly("t_max", &CaptureTable::t_max)
        .def("at", &CaptureTable::at);

    py::class_<DeResult>(m, "DeResult")
        .def_readonly("p_r", &DeResult::p_r)
        .def_readonly("throughput", &DeResult::throughput)
        .def_property_readonly("r", [](const DeResult& r) { return r.state.r; })
        .def_property_readonly("q", [](const DeResult& r) { return r.state.q; })
        .def_property_readonly("iterations", [](const DeResult& r) { return r.state.iteration; })
        .def_property_readonly("converged", [](const DeResult& r) { return r.state.converged; });

    py::class_<BetaOptimum>(m, "BetaOptimum")
        .def_readonly("beta", &BetaOptimum::beta)
        .def_readonly("p_r", &BetaOptimum::p_r)
        .def_readonly("throughput", &BetaOptimum::throughput)
        .def_readonly("converged", &BetaOptimum::converged);

    py::class_<RunStats>(m, "RunStats")
        .def_readonly("seed", &RunStats::seed)
        .def_readonly("slots_used", &RunStats::slots_used)
        .def_readonly("resolved_count", &RunStats::resolved_count)
        .def_readonly("fraction_resolved", &RunStats::fraction_resolved)
        .def_readonly("throughput", &RunStats::throughput)
        .def_readonly("cause", &RunStats::cause);

    py::class_<SweepPoint>(m, "SweepPoint")
        .def(py::init([](double beta, double v, double s) { return SweepPoint{beta, v, s}; }), py::arg("beta"),
             py::arg("threshold_v"), py::arg("threshold_s"))
        .def_readwrite("beta", &SweepPoint::beta)
        .def_readwrite("threshold_v", &SweepPoint::threshold_v)
        .def_readwrite("threshold_s", &SweepPoint::threshold_s);

    py::class_<GridSpec>(m, "GridSpec")
        .def(py::init([](double lo, double hi, double step) { return GridSpec{lo, hi, step}; }), py::arg("min"),
             py::arg("max"), py::arg("step"))
        .def_readwrite("min", &GridSpec::min)
        .def_readwrite("max", &GridSpec::max)
        .def_readwrite("step", &GridSpec::step)
        .def("values", &GridSpec::values);

    py::class_<SweepConfig>(m, "SweepConfig")
        .def(py::init<>())
        .def_static("defaults", &SweepConfig::defaults, py::arg("full_scale") = false)
        .def_readwrite("beta", &SweepConfig::beta)
        .def_readwrite("threshold_v", &SweepConfig::threshold_v)
        .def_readwrite("threshold_s", &SweepConfig::threshold_s)
        .def_readwrite("runs_per_point", &SweepConfig::runs_per_point)
        .def_readwrite("params", &SweepConfig::params)
        .def_readwrite("reception", &SweepConfig::reception)
        .def_readwrite("refine", &SweepConfig::refine)
        .def_readwrite("threads", &SweepConfig::threads);

    m.def("slot_access_probability", &slot_access_probability, py::arg("beta"), py::arg("n_users"));
    m.def(
        "poisson_degree_pmfs",
        [](double beta, double epsilon) {
            const auto d = poisson_degree_pmfs(beta, epsilon);
            py::dict out;
            out["node_user"] = d.node_user;
            out["node_slot"] = d.node_slot;
            out["edge_user"] = d.edge_user;
            out["edge_slot"] = d.edge_slot;
            return out;
        },
        py::arg("beta"), py::arg("epsilon"));

    m.def("singleton_capture_prob", &singleton_capture_prob, py::arg("b"), py::arg("mean_snr"));
    m.def("c1_closed_form", &c1_closed_form, py::arg("t"), py::arg("b"), py::arg("mean_snr"));
    m.def(
        "intra_slot_sic_oracle",
        [](const std::vector<double>& snrs, std::size_t tagged, double b) {
            return intra_slot_sic_oracle(snrs, tagged, b);
        },
        py::arg("snrs"), py::arg("tagged"), py::arg("b"));
    m.def("build_capture_table", &build_capture_table, py::arg("channel"), py::arg("t_max"),
          py::arg("samples") = kDefaultTableSamples, py::arg("seed") = 1, py::arg("threads") = 1,
          py::call_guard<py::gil_scoped_release>());
    m.def("collision_only_table", &collision_only_table, py::arg("t_max"));
    m.def("default_table_t_max", &default_table_t_max, py::arg("max_beta") = 10.0);

    m.def("fixed_point", &fixed_point, py::arg("beta"), py::arg("load"), py::arg("table"),
          "Asymptotic fixed point at expected slot degree beta and M/N = load.");
    m.def(
        "optimize_beta",
        [](double load, const CaptureTable& table, const std::vector<double>& grid) {
            return optimize_beta(load - 1.0, table, grid);
        },
        py::arg("load"), py::arg("table"), py::arg("beta_grid"), py::call_guard<py::gil_scoped_release>());

    m.def(
        "run_contention",
        [](const SystemParams& params, const ChannelParams& channel, std::uint64_t seed) {
            params.validate();
            Rng rng(mix_seed(seed));
            return run_contention(params, channel, rng);
        },
        py::arg("params"), py::arg("channel"), py::arg("seed") = 1);
    m.def(
        "run_batch",
        [](const SystemParams& params, const ChannelParams& channel, std::uint32_t runs, unsigned threads) {
            std::vector<RunStats> out;
            {
                py::gil_scoped_release release;
                out = run_batch(params, channel, runs, threads, false);
            }
            return out;
        },
        py::arg("params"), py::arg("channel"), py::arg("runs"), py::arg("threads") = 1);
    m.def(
        "summarize", [](const std::vector<RunStats>& runs, std::uint32_t n) { return summary_dict(summarize(runs, n)); },
        py::arg("runs"), py::arg("n_users"));

    m.def(
        "evaluate_point",
        [](const SweepPoint& point, const SweepConfig& config) {
            PointAggregate agg;
            {
                py::gil_scoped_release release;
                agg = evaluate_point(point, config);
            }
            return summary_dict(agg.summary);
        },
        py::arg("point"), py::arg("config"));
    m.def(
        "grid_search",
        [](const SweepConfig& config) {
            SweepResult r;
            {
                py::gil_scoped_release release;
                r = grid_search(config);
            }
            py::dict d = summary_dict(r.best.summary);
            d["beta"] = r.best.point.beta;
            d["threshold_v"] = r.best.point.threshold_v;
            d["threshold_s"] = r.best.point.threshold_s;
            d["points_evaluated"] = r.points_evaluated;
            d["precision_warning"] = r.precision_warning;
            return d;
        },
        py::arg("config"));
}
