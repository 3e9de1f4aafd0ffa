// Command-line front end for the non-local point cloud filter.
//
// Subcommands:
//   filter   denoise a cloud (similar-patch search + position update)
//   noise    add synthetic Gaussian noise
//   metrics  Chamfer Distance and MSE against a reference cloud
//   similar  dump the similar-set centers of one point for inspection
//
// Exit codes: 0 success, 1 usage error, 2 I/O or parse error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nlpf/nlpf.hpp"

namespace {

void write_report(const nlpf::FilterReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw nlpf::IoError(path + ": cannot open for writing");
    out << "iterations=" << report.iterations.size() << "\n";
    for (std::size_t i = 0; i < report.iterations.size(); ++i) {
        out << "iter=" << i + 1 << " step1=" << report.iterations[i].step1_seconds
            << " step2=" << report.iterations[i].step2_seconds << "\n";
    }
    out << "total_step1=" << report.total_step1()
        << " total_step2=" << report.total_step2() << "\n";
    for (std::size_t i = 0; i < report.similar_set_sizes.size(); ++i)
        out << "set_size " << i << " " << report.similar_set_sizes[i] << "\n";
}

int run_filter(const std::string& in_path, const std::string& out_path,
               int k, double theta, int iters, int scheme, double sample,
               std::uint64_t seed, const std::string& report_path,
               bool normalize) {
    nlpf::FilterParams params;
    params.k = k;
    params.theta = theta;
    params.iterations = iters;
    params.scheme = scheme == 1 ? nlpf::IterationScheme::kRefindEachIteration
                                : nlpf::IterationScheme::kReuseFirstSearch;

    std::cerr << "scheme " << scheme
              << (scheme == 1 ? " (re-find each iteration; suits larger noise)"
                              : " (reuse first search; suits smaller noise)")
              << "\n";

    nlpf::PointCloud cloud = nlpf::read_cloud(in_path);
    double scale = 1.0;
    if (normalize) {
        scale = nlpf::bounding_box_diagonal(cloud);
        if (scale > 0.0)
            for (auto& p : cloud) p /= scale;
    }

    nlpf::PointCloud filtered;
    nlpf::FilterReport report;
    if (sample < 1.0) {
        auto [subcloud, indices] = nlpf::subsample(cloud, sample, seed);
        auto [result, rep] = nlpf::filter(subcloud, params);
        filtered = cloud;
        for (std::size_t i = 0; i < indices.size(); ++i)
            filtered[indices[i]] = result[i];
        report = std::move(rep);
    } else {
        auto [result, rep] = nlpf::filter(cloud, params);
        filtered = std::move(result);
        report = std::move(rep);
    }

    if (normalize && scale > 0.0)
        for (auto& p : filtered) p *= scale;

    nlpf::write_cloud(filtered, out_path);
    if (!report_path.empty()) write_report(report, report_path);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Non-local point cloud filtering via RPCA patch descriptors"};
    app.require_subcommand(1);

    // filter
    auto* filter_cmd = app.add_subcommand("filter", "Denoise a point cloud");
    std::string f_in, f_out, f_report;
    int f_k = 100, f_iters = 1, f_scheme = 2;
    double f_theta = 0.05, f_sample = 1.0;
    std::uint64_t f_seed = 0;
    bool f_normalize = false;
    filter_cmd->add_option("--in", f_in, "Input cloud (.xyz or .ply)")->required();
    filter_cmd->add_option("--out", f_out, "Output cloud")->required();
    filter_cmd->add_option("--k", f_k, "Patch size (K nearest neighbors)");
    filter_cmd->add_option("--theta", f_theta, "Similarity threshold");
    filter_cmd->add_option("--iters", f_iters, "Number of iterations");
    filter_cmd->add_option("--scheme", f_scheme, "Iteration scheme: 1 or 2")
        ->check(CLI::IsMember({1, 2}));
    filter_cmd->add_option("--sample", f_sample,
                           "Filter only this fraction of points");
    filter_cmd->add_option("--seed", f_seed, "Sampling seed");
    filter_cmd->add_option("--report", f_report, "Write timing report here");
    filter_cmd->add_flag("--normalize", f_normalize,
                         "Rescale to unit bounding-box diagonal while "
                         "filtering (theta then matches unit-scale values)");

    // noise
    auto* noise_cmd = app.add_subcommand("noise", "Add Gaussian noise");
    std::string n_in, n_out;
    double n_level = 0.005;
    std::uint64_t n_seed = 0;
    noise_cmd->add_option("--in", n_in, "Input cloud")->required();
    noise_cmd->add_option("--out", n_out, "Output cloud")->required();
    noise_cmd->add_option("--level", n_level,
                          "Noise sigma as a fraction of the bounding-box "
                          "diagonal")->required();
    noise_cmd->add_option("--seed", n_seed, "Random seed");

    // metrics
    auto* metrics_cmd =
        app.add_subcommand("metrics", "Chamfer Distance and MSE");
    std::string m_ref, m_in;
    int m_k = 10;
    metrics_cmd->add_option("--ref", m_ref, "Reference cloud")->required();
    metrics_cmd->add_option("--in", m_in, "Cloud to evaluate")->required();
    metrics_cmd->add_option("--k", m_k, "Neighbors for MSE");

    // similar
    auto* similar_cmd = app.add_subcommand(
        "similar", "Dump similar-set center points of one query point");
    std::string s_in, s_out;
    int s_point = 0, s_k = 100;
    double s_theta = 0.05;
    similar_cmd->add_option("--in", s_in, "Input cloud")->required();
    similar_cmd->add_option("--point", s_point, "Query point index")->required();
    similar_cmd->add_option("--k", s_k, "Patch size");
    similar_cmd->add_option("--theta", s_theta, "Similarity threshold");
    similar_cmd->add_option("--out", s_out, "Output XYZ of member centers")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (filter_cmd->parsed()) {
            if (f_sample <= 0.0 || f_sample > 1.0) {
                std::cerr << "error: --sample must be in (0, 1]\n";
                return 1;
            }
            return run_filter(f_in, f_out, f_k, f_theta, f_iters, f_scheme,
                              f_sample, f_seed, f_report, f_normalize);
        }
        if (noise_cmd->parsed()) {
            nlpf::PointCloud cloud = nlpf::read_cloud(n_in);
            nlpf::write_cloud(nlpf::add_gaussian_noise(cloud, n_level, n_seed),
                              n_out);
            return 0;
        }
        if (metrics_cmd->parsed()) {
            nlpf::PointCloud ref = nlpf::read_cloud(m_ref);
            nlpf::PointCloud in = nlpf::read_cloud(m_in);
            double cd = nlpf::chamfer(ref, in);
            double err = nlpf::mse(ref, in, m_k);
            std::cout << "chamfer=" << cd << " mse=" << err << "\n";
            std::cout << "chamfer_x1e5=" << cd * 1e5
                      << " mse_x1e3=" << err * 1e3 << "\n";
            return 0;
        }
        if (similar_cmd->parsed()) {
            nlpf::PointCloud cloud = nlpf::read_cloud(s_in);
            nlpf::KdTree index(cloud);
            nlpf::DescriptorTable table =
                nlpf::build_descriptor_table(cloud, s_k, index);
            nlpf::SimilarSet set = nlpf::find_similar(s_point, table, s_theta);
            nlpf::PointCloud centers;
            for (int j : set.member_indices) centers.push_back(cloud[j]);
            nlpf::write_cloud(centers, s_out);
            std::cout << "members=" << set.member_indices.size() << "\n";
            return 0;
        }
    } catch (const nlpf::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
