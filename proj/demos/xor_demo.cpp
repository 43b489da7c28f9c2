// Head-to-head on the XOR benchmark: ZORB's one-shot solve vs Adam run
// until it matches ZORB's training error.

#include <cstdio>

#include "zorb/zorb.hpp"

int main() {
    zorb::Dataset ds = zorb::gen_xor(1000, 1000, /*seed=*/3);
    const std::string arch = zorb::default_arch("xor");

    zorb::Network zorb_net = zorb::parse_arch(arch, ds, 3);
    zorb::ZorbConfig zc;
    zc.seed = 3;
    zc.task = zorb::Task::Classification;
    zorb::TrainReport zr = zorb::zorb_train(zorb_net, ds.train_x, ds.train_y, zc);
    zorb::Metrics zm = zorb::evaluate(zorb_net, ds.test_x, ds.test_y, ds.task);
    std::printf("zorb: train mse %.4f, test acc %.2f%%, %.4f s\n", zr.final_train_mse,
                *zm.accuracy, zr.wall_clock_seconds);

    zorb::Network adam_net = zorb::parse_arch(arch, ds, 3);
    zorb::AdamConfig ac;
    ac.seed = 3;
    ac.max_iterations = 20000;
    ac.task = zorb::Task::Classification;
    const double adam_seconds =
        zorb::adam_time_to_error(adam_net, ds.train_x, ds.train_y, ac, zr.final_train_mse);
    zorb::Metrics am = zorb::evaluate(adam_net, ds.test_x, ds.test_y, ds.task);
    std::printf("adam: test acc %.2f%%, %.4f s to reach zorb's train mse (%.0fx slower)\n",
                *am.accuracy, adam_seconds, adam_seconds / zr.wall_clock_seconds);
    return 0;
}
