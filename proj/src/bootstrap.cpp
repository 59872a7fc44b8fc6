#include <atomic>
#include <exception>
#include <optional>
#include <thread>

#include "qeb/fitqeb.hpp"
#include "qeb/sampler.hpp"

namespace qeb {

BootstrapResult bootstrap_compare(const TomographyDataset& data, const DensityMatrix& rho_mle, int reps,
                                  const FigureOfMerit& fom, std::uint64_t seed, const MleOptions& mle_options,
                                  int num_threads) {
  BootstrapResult out;
  if (reps <= 0) return out;
  if (!data.design())
    throw std::invalid_argument("bootstrap_compare: the dataset carries no experiment design to resample");
  const auto settings = data.settings();
  const auto shots = data.design()->shots_per_setting;

  std::vector<std::optional<double>> values(static_cast<std::size_t>(reps));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(reps));
  auto work = [&](int i) {
    try {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
      const auto resampled = simulate_dataset(rho_mle, settings, shots, rng);
      const auto est = mle(resampled, mle_options);
      if (est.converged) values[static_cast<std::size_t>(i)] = fom.evaluate(est.state);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  };

  const int threads = std::min(reps, num_threads > 0 ? num_threads : default_thread_count());
  if (threads <= 1) {
    for (int i = 0; i < reps; ++i) work(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (int i = next++; i < reps; i = next++) work(i);
      });
    for (auto& th : pool) th.join();
  }

  for (std::size_t i = 0; i < values.size(); ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    if (values[i])
      out.values.push_back(*values[i]);
    else
      ++out.failures;
  }
  return out;
}

}  // namespace qeb
