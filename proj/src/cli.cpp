#include "dinw/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "dinw/color.hpp"
#include "dinw/corpus.hpp"
#include "dinw/image_io.hpp"
#include "dinw/kernels.hpp"
#include "dinw/metrics.hpp"
#include "dinw/model.hpp"
#include "dinw/parallel.hpp"
#include "dinw/patches.hpp"
#include "dinw/pipeline.hpp"
#include "dinw/resize.hpp"
#include "dinw/train.hpp"

namespace fs = std::filesystem;

namespace dinw {

namespace {

std::string frame_name(int index, const char* suffix) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "frame_%06d%s.png", index, suffix);
    return buf;
}

// ---------------------------------------------------------------- synth ----

struct SynthOpts {
    std::string in_dir;
    std::string out_dir;
    std::string patches_path;
    int procedural_pairs = 0;  // pairs per hermetic clip; 0 = use in_dir
    int rescale = 512;         // patch pipeline frame size; 0 keeps native
    std::uint64_t seed = 1;
};

struct PairSource {
    // Loads or renders progressive frames by index.
    std::vector<std::string> files;           // file mode
    const ClipSpec* clip = nullptr;           // procedural mode
    int count() const {
        return clip != nullptr ? clip->frame_count : static_cast<int>(files.size());
    }
    Frame frame(int i) const {
        return clip != nullptr ? render_clip_frame(*clip, i) : load_image(files[static_cast<std::size_t>(i)]);
    }
    std::string label(int i) const {
        return clip != nullptr ? clip->name + "[" + std::to_string(i) + "]"
                               : files[static_cast<std::size_t>(i)];
    }
};

int cmd_synth(const SynthOpts& o) {
    fs::create_directories(o.out_dir);
    fs::create_directories(fs::path(o.out_dir) / "interlaced");
    fs::create_directories(fs::path(o.out_dir) / "truth");

    std::vector<PairSource> sources;
    std::vector<ClipSpec> clips;
    if (o.procedural_pairs > 0) {
        clips = hermetic_corpus();
        for (auto& c : clips) {
            c.frame_count = 2 * o.procedural_pairs;
            sources.push_back(PairSource{{}, &c});
        }
    } else {
        PairSource s;
        s.files = list_frames(o.in_dir);
        if (s.files.empty()) {
            std::cerr << "error: no input frames in " << o.in_dir << "\n";
            return 1;
        }
        sources.push_back(std::move(s));
    }

    std::optional<PatchArchiveWriter> archive;
    if (!o.patches_path.empty()) archive.emplace(o.patches_path);

    int errors = 0;
    int frames_seen = 0;
    int pair_index = 0;
    std::uint32_t source_id = 0;

    for (const auto& src : sources) {
        frames_seen += src.count();
        for (int i = 0; i + 1 < src.count(); i += 2) {
            try {
                const Frame f0 = src.frame(i);
                const Frame f1 = src.frame(i + 1);
                if (!f0.same_dims(f1)) {
                    throw ShapeError("pair dimensions differ");
                }
                if (f0.height % 2 != 0) {
                    throw ParityError("odd frame height " + std::to_string(f0.height));
                }
                ++pair_index;
                const Frame inter = interlace(f0, f1);
                save_image((fs::path(o.out_dir) / "interlaced" / frame_name(pair_index, "")).string(),
                           inter);
                save_image((fs::path(o.out_dir) / "truth" / frame_name(pair_index, "_t")).string(), f0);
                save_image((fs::path(o.out_dir) / "truth" / frame_name(pair_index, "_t1")).string(),
                           f1);

                if (archive.has_value()) {
                    Frame a = f0;
                    Frame b = f1;
                    if (o.rescale > 0) {
                        a = resize_bilinear(a, o.rescale, o.rescale);
                        b = resize_bilinear(b, o.rescale, o.rescale);
                    }
                    const Frame la = rgb_to_L(a);
                    const Frame lb = rgb_to_L(b);
                    const Frame li = interlace(la, lb);
                    for (auto& t : extract_patches(li, la, lb, source_id)) {
                        archive->add(t);
                    }
                    ++source_id;
                }
            } catch (const std::exception& e) {
                std::cerr << "error: " << src.label(i) << " / " << src.label(i + 1) << ": "
                          << e.what() << "\n";
                ++errors;
            }
        }
    }

    std::uint64_t patch_count = 0;
    if (archive.has_value()) {
        patch_count = archive->count();
        archive->close();
    }

    std::cout << frames_seen << " input frames, " << pair_index << " pairs\n"
              << pair_index << " interlaced frames, " << 2 * pair_index
              << " ground-truth frames written to " << o.out_dir << "\n";
    if (!o.patches_path.empty()) {
        std::cout << patch_count << " patch triplets written to " << o.patches_path << "\n";
    }
    return errors == 0 ? 0 : 1;
}

// ---------------------------------------------------------------- train ----

struct TrainOpts {
    std::string archive;
    std::string out_weights;
    std::string log_path;
    std::string resume;
    TrainConfig cfg;
    double train_fraction = 0.8;
};

int cmd_train(const TrainOpts& o) {
    std::printf("train: lr=%g lambda_tv=%g epochs=%d batch=%d seed=%llu backend=%s\n",
                o.cfg.learning_rate, o.cfg.lambda_tv, o.cfg.epochs, o.cfg.batch_size,
                static_cast<unsigned long long>(o.cfg.seed),
                kernels::backend_name(kernels::active_backend()));

    const auto all = load_patch_archive(o.archive);
    if (all.empty()) {
        std::cerr << "error: patch archive is empty\n";
        return 1;
    }
    auto [train_set, val_set] = split_dataset(all, o.train_fraction, o.cfg.seed);
    std::printf("dataset: %zu triplets -> %zu train / %zu validation\n", all.size(),
                train_set.size(), val_set.size());

    std::ofstream log;
    if (!o.log_path.empty()) {
        log.open(o.log_path);
        if (!log) {
            std::cerr << "error: cannot open loss log " << o.log_path << "\n";
            return 1;
        }
        log << "epoch,train_loss,val_loss,seconds\n";
    }
    const EpochCallback on_epoch = [&](const EpochStats& s) {
        std::printf("epoch %d/%d  train %.6g  val %.6g  (%.1fs)\n", s.epoch, o.cfg.epochs,
                    s.train_loss, s.val_loss, s.seconds);
        if (log.is_open()) {
            log << s.epoch << ',' << s.train_loss << ',' << s.val_loss << ',' << s.seconds << '\n';
            log.flush();
        }
    };

    const TrainResult result =
        o.resume.empty() ? train(train_set, val_set, o.cfg, NetConfig{}, on_epoch)
                         : resume_training(o.resume, train_set, val_set, o.cfg, on_epoch);
    save_weights(result.net, result.meta, o.out_weights);
    std::cout << "weights written to " << o.out_weights << " (final loss "
              << result.meta.final_loss << ")\n";
    return 0;
}

// ---------------------------------------------------------------- infer ----

struct InferOpts {
    std::string in_dir;
    std::string out_dir;
    std::string weights;
    std::string method = "net";
    bool verify = false;
    int bit_depth = 8;
};

bool rows_match(const Frame& a, const Frame& b, int parity_offset) {
    for (int c = 0; c < a.channels; ++c) {
        for (int y = parity_offset; y < a.height; y += 2) {
            if (std::memcmp(a.row(c, y), b.row(c, y),
                            static_cast<std::size_t>(a.width) * sizeof(float)) != 0) {
                return false;
            }
        }
    }
    return true;
}

int cmd_infer(const InferOpts& o) {
    const Method method = method_from_name(o.method);
    std::optional<DeinterlaceNet> net;
    if (method == Method::Net) {
        if (o.weights.empty()) {
            std::cerr << "error: --method net requires --weights\n";
            return 1;
        }
        net = load_weights(o.weights).net;
    }

    const auto files = list_frames(o.in_dir);
    if (files.empty()) {
        std::cerr << "error: no input frames in " << o.in_dir << "\n";
        return 1;
    }
    fs::create_directories(o.out_dir);

    int errors = 0;
    int written = 0;
    for (std::size_t i = 0; i < files.size(); ++i) {
        try {
            const Frame in = load_image(files[i]);
            auto [out_t, out_t1] =
                deinterlace_frame(in, method, net.has_value() ? &*net : nullptr);
            if (o.verify) {
                if (!rows_match(out_t, in, 0) || !rows_match(out_t1, in, 1)) {
                    throw Error("retained-field verification failed");
                }
            }
            const int idx = static_cast<int>(i) + 1;
            save_image((fs::path(o.out_dir) / frame_name(idx, "_t")).string(), out_t, o.bit_depth);
            save_image((fs::path(o.out_dir) / frame_name(idx, "_t1")).string(), out_t1,
                       o.bit_depth);
            written += 2;
        } catch (const std::exception& e) {
            std::cerr << "error: " << files[i] << ": " << e.what() << "\n";
            ++errors;
        }
    }
    std::cout << files.size() << " interlaced frames -> " << written << " output frames ("
              << o.method << ")\n";
    if (o.verify && errors == 0) {
        std::cout << "verified: retained fields are bit-exact\n";
    }
    return errors == 0 ? 0 : 1;
}

// ----------------------------------------------------------------- eval ----

struct EvalOpts {
    std::string pred_dir;
    std::string truth_dir;
    std::string csv_path;
    std::string sequence;  // default: truth dir name
    std::string method;    // default: pred dir name (flat layout)
};

void eval_one_method(QualityReport& report, const std::string& sequence,
                     const std::string& method, const std::vector<std::string>& pred_files,
                     const std::vector<std::string>& truth_files) {
    if (pred_files.size() != truth_files.size()) {
        throw Error("frame count mismatch: " + std::to_string(pred_files.size()) +
                    " predictions vs " + std::to_string(truth_files.size()) + " ground-truth");
    }
    for (std::size_t i = 0; i < pred_files.size(); ++i) {
        const Frame p = rgb_to_L(load_image(pred_files[i]));
        const Frame t = rgb_to_L(load_image(truth_files[i]));
        report.add(sequence, method, static_cast<int>(i) + 1, psnr(p, t), ssim(p, t));
    }
}

int cmd_eval(const EvalOpts& o) {
    const auto truth_files = list_frames(o.truth_dir);
    if (truth_files.empty()) {
        std::cerr << "error: no ground-truth frames in " << o.truth_dir << "\n";
        return 1;
    }
    const std::string sequence =
        o.sequence.empty() ? fs::path(o.truth_dir).filename().string() : o.sequence;

    QualityReport report;
    // Method subdirectories, or a flat directory of frames.
    std::vector<std::pair<std::string, std::string>> methods;  // (label, dir)
    for (const auto& entry : fs::directory_iterator(o.pred_dir)) {
        if (entry.is_directory()) {
            methods.emplace_back(entry.path().filename().string(), entry.path().string());
        }
    }
    std::sort(methods.begin(), methods.end());
    if (methods.empty()) {
        const std::string label =
            o.method.empty() ? fs::path(o.pred_dir).filename().string() : o.method;
        methods.emplace_back(label, o.pred_dir);
    }

    for (const auto& [label, dir] : methods) {
        eval_one_method(report, sequence, label, list_frames(dir), truth_files);
    }

    report.write_table(std::cout);
    if (!o.csv_path.empty()) {
        std::ofstream csv(o.csv_path);
        if (!csv) {
            std::cerr << "error: cannot open " << o.csv_path << "\n";
            return 1;
        }
        report.write_csv(csv);
        std::cout << "CSV written to " << o.csv_path << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------- bench ----

struct BenchOpts {
    std::string weights;
    std::string resolutions = "720x480,720x576,1024x768,1920x1080";
    std::string methods = "net,net_unshared,weave,bob_bicubic,ela";
    std::string csv_path;
    int frames = 50;
    int warmup = 5;
    std::uint64_t seed = 1;
};

std::vector<std::pair<int, int>> parse_resolutions(const std::string& s) {
    std::vector<std::pair<int, int>> out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        const std::size_t comma = s.find(',', pos);
        const std::string tok = s.substr(pos, comma == std::string::npos ? comma : comma - pos);
        const std::size_t x = tok.find('x');
        if (x == std::string::npos) throw Error("bad resolution: " + tok);
        out.emplace_back(std::stoi(tok.substr(0, x)), std::stoi(tok.substr(x + 1)));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

std::vector<std::string> split_csv_list(const std::string& s) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const std::size_t comma = s.find(',', pos);
        out.push_back(s.substr(pos, comma == std::string::npos ? comma : comma - pos));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

int cmd_bench(const BenchOpts& o) {
    DeinterlaceNet net = o.weights.empty() ? DeinterlaceNet::create(NetConfig{}, o.seed)
                                           : load_weights(o.weights).net;
    if (o.weights.empty()) {
        std::cout << "note: benchmarking with randomly initialized weights\n";
    }

    std::vector<TimingReport> reports;
    for (const auto& [w, h] : parse_resolutions(o.resolutions)) {
        // A few distinct luminance frames per resolution, cycled.
        ClipSpec clip{"bench", ClipKind::Scroll, w, h, 4, 3, o.seed};
        std::vector<Frame> frames;
        for (int i = 0; i < clip.frame_count; ++i) {
            frames.push_back(rgb_to_L(render_clip_frame(clip, i)));
        }

        for (const std::string& m : split_csv_list(o.methods)) {
            std::function<void(const Frame&)> fn;
            std::uint64_t macs = 0;
            if (m == "net") {
                fn = [&net](const Frame& f) { net.forward(frame_to_tensor(f)); };
                macs = flop_count(net, h, w, true);
            } else if (m == "net_unshared") {
                fn = [&net](const Frame& f) {
                    const Tensor t = frame_to_tensor(f);
                    net.forward_path(t, Pathway::EvenT);
                    net.forward_path(t, Pathway::OddT1);
                };
                macs = flop_count(net, h, w, false);
            } else {
                const Method method = method_from_name(m);
                fn = [method](const Frame& f) { deinterlace_plane(f, method, nullptr); };
            }
            reports.push_back(bench_method(m, frames, o.frames, o.warmup, fn, macs));
            const auto& r = reports.back();
            std::printf("%dx%d  %-14s  %.6f s/frame  (%llu MACs)\n", w, h, m.c_str(),
                        r.mean_seconds, static_cast<unsigned long long>(r.macs));
        }

        // Sharing-economy summary when both net variants ran.
        const TimingReport* shared = nullptr;
        const TimingReport* unshared = nullptr;
        for (const auto& r : reports) {
            if (r.width != w || r.height != h) continue;
            if (r.method == "net") shared = &r;
            if (r.method == "net_unshared") unshared = &r;
        }
        if (shared != nullptr && unshared != nullptr) {
            std::printf("%dx%d  unshared/shared time ratio %.2f, MAC ratio %.2f "
                        "(paper GPU ratio at 1920x1080: 0.2520/0.0835 = 3.02)\n",
                        w, h, unshared->mean_seconds / shared->mean_seconds,
                        static_cast<double>(unshared->macs) / static_cast<double>(shared->macs));
        }
    }

    std::cout << "\n";
    write_timing_table(std::cout, reports);
    if (!o.csv_path.empty()) {
        std::ofstream csv(o.csv_path);
        if (!csv) {
            std::cerr << "error: cannot open " << o.csv_path << "\n";
            return 1;
        }
        write_timing_csv(csv, reports);
        std::cout << "CSV written to " << o.csv_path << "\n";
    }
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"dinw: two-pathway CNN video deinterlacer (train, infer, evaluate, "
                 "benchmark). DINW_THREADS caps worker threads; DINW_SIMD forces the "
                 "kernel backend (scalar|avx2|auto)."};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value config file; command-line flags win");
    int rc = 0;

    SynthOpts synth_opts;
    auto* synth = app.add_subcommand(
        "synth", "Synthesize interlaced frames (and a patch archive) from progressive frames");
    synth->add_option("--in", synth_opts.in_dir, "Directory of ordered progressive frames");
    synth->add_option("--procedural", synth_opts.procedural_pairs,
                      "Generate N pairs per built-in procedural clip instead of reading --in")
        ->capture_default_str();
    synth->add_option("--out", synth_opts.out_dir, "Output directory")->required();
    synth->add_option("--patches", synth_opts.patches_path,
                      "Write a packed patch archive to this path");
    synth->add_option("--size", synth_opts.rescale,
                      "Rescale frames to size x size for patch extraction; 0 keeps native")
        ->capture_default_str();
    synth->add_option("--seed", synth_opts.seed, "Seed")->capture_default_str();
    synth->callback([&]() { rc = cmd_synth(synth_opts); });

    TrainOpts train_opts;
    auto* tr = app.add_subcommand("train", "Train the deinterlacing network on a patch archive");
    tr->add_option("--archive", train_opts.archive, "Patch archive from synth --patches")
        ->required();
    tr->add_option("--out", train_opts.out_weights, "Output weights file")->required();
    tr->add_option("--lr", train_opts.cfg.learning_rate, "ADAM learning rate")
        ->capture_default_str();
    tr->add_option("--lambda-tv", train_opts.cfg.lambda_tv, "Total-variation weight")
        ->capture_default_str();
    tr->add_option("--epochs", train_opts.cfg.epochs, "Training epochs")->capture_default_str();
    tr->add_option("--batch", train_opts.cfg.batch_size, "Minibatch size")->capture_default_str();
    tr->add_option("--seed", train_opts.cfg.seed, "Seed for init, shuffle and split")
        ->capture_default_str();
    tr->add_option("--train-fraction", train_opts.train_fraction,
                   "Fraction of triplets used for training")
        ->capture_default_str();
    tr->add_option("--log", train_opts.log_path, "CSV loss log (epoch,train,val,seconds)");
    tr->add_option("--checkpoint", train_opts.cfg.checkpoint_path, "Checkpoint file path");
    tr->add_option("--checkpoint-every", train_opts.cfg.checkpoint_every,
                   "Checkpoint cadence in epochs (0 = off)")
        ->capture_default_str();
    tr->add_option("--resume", train_opts.resume, "Resume from a checkpoint file");
    tr->callback([&]() { rc = cmd_train(train_opts); });

    InferOpts infer_opts;
    auto* inf = app.add_subcommand("infer", "Deinterlace a directory of frames");
    inf->add_option("--in", infer_opts.in_dir, "Directory of interlaced frames")->required();
    inf->add_option("--out", infer_opts.out_dir, "Output directory")->required();
    inf->add_option("--weights", infer_opts.weights, "Weights file (needed for --method net)");
    inf->add_option("--method", infer_opts.method,
                    "One of net, weave, bob_linear, bob_bicubic, ela")
        ->capture_default_str();
    inf->add_flag("--verify", infer_opts.verify,
                  "Check that retained fields match the input bit-exact");
    inf->add_option("--bit-depth", infer_opts.bit_depth, "PNG output depth (8 or 16)")
        ->capture_default_str();
    inf->callback([&]() { rc = cmd_infer(infer_opts); });

    EvalOpts eval_opts;
    auto* ev = app.add_subcommand("eval", "PSNR/SSIM of predictions against ground truth");
    ev->add_option("--pred", eval_opts.pred_dir,
                   "Predictions: a frame directory, or one subdirectory per method")
        ->required();
    ev->add_option("--truth", eval_opts.truth_dir, "Ground-truth frame directory")->required();
    ev->add_option("--csv", eval_opts.csv_path, "Write per-frame rows and averages as CSV");
    ev->add_option("--sequence", eval_opts.sequence, "Sequence label (default: truth dir name)");
    ev->add_option("--method", eval_opts.method, "Method label for flat --pred layouts");
    ev->callback([&]() { rc = cmd_eval(eval_opts); });

    BenchOpts bench_opts;
    auto* be = app.add_subcommand("bench", "Per-frame wall-clock timing and MAC counts");
    be->add_option("--weights", bench_opts.weights, "Weights file (random weights if omitted)");
    be->add_option("--resolutions", bench_opts.resolutions, "Comma-separated WxH list")
        ->capture_default_str();
    be->add_option("--methods", bench_opts.methods,
                   "Comma-separated: net, net_unshared, weave, bob_linear, bob_bicubic, ela")
        ->capture_default_str();
    be->add_option("--frames", bench_opts.frames, "Measured frames per method")
        ->capture_default_str();
    be->add_option("--warmup", bench_opts.warmup, "Warmup frames excluded from the mean")
        ->capture_default_str();
    be->add_option("--seed", bench_opts.seed, "Seed for synthetic frames")->capture_default_str();
    be->add_option("--csv", bench_opts.csv_path, "Write the timing table as CSV");
    be->callback([&]() { rc = cmd_bench(bench_opts); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return rc;
}

}  // namespace dinw
