#include "hyda/multitask.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <sstream>

namespace hyda {

const char* to_string(Task t) { return t == Task::main ? "main" : "aux"; }

MultiTaskNet::MultiTaskNet(Mlp encoder, Mlp head_main, Mlp head_aux, Loss loss_main, Loss loss_aux)
    : encoder_(std::move(encoder)),
      head_main_(std::move(head_main)),
      head_aux_(std::move(head_aux)),
      loss_main_(loss_main),
      loss_aux_(loss_aux) {
  if (encoder_.output_dim() != head_main_.input_dim() ||
      encoder_.output_dim() != head_aux_.input_dim())
    throw ShapeError("MultiTaskNet: encoder output dim must equal both heads' input dim");
}

Mlp& MultiTaskNet::group(ParamGroup g) {
  switch (g) {
    case ParamGroup::shared: return encoder_;
    case ParamGroup::head_main: return head_main_;
    case ParamGroup::head_aux: return head_aux_;
  }
  return encoder_;
}

const Mlp& MultiTaskNet::group(ParamGroup g) const {
  return const_cast<MultiTaskNet*>(this)->group(g);
}

std::uint64_t MultiTaskNet::params_checksum() const {
  std::uint64_t h = encoder_.params_checksum();
  h = checksum_bytes(&h, sizeof(h));
  std::uint64_t hm = head_main_.params_checksum();
  h = checksum_bytes(&hm, sizeof(hm), h);
  std::uint64_t ha = head_aux_.params_checksum();
  return checksum_bytes(&ha, sizeof(ha), h);
}

TaskForward task_forward(const MultiTaskNet& net, const Batch& batch, Task task) {
  TaskForward out;
  Matrix encoded = forward(net.encoder(), batch.inputs, &out.encoder_cache);
  out.pred = forward(net.head(task), encoded, &out.head_cache);
  return out;
}

std::pair<double, GradientBundle> task_gradients(const MultiTaskNet& net, const Batch& batch,
                                                 Task task) {
  TaskForward fwd = task_forward(net, batch, task);
  const Matrix& target = task == Task::main ? batch.targets_main : batch.targets_aux;
  const Loss& loss = net.loss(task);
  const Mlp& head = net.head(task);

  auto [value, loss_grad] = loss_value_and_grad(loss, fwd.pred, target);

  // Fused sigmoid+BCE: gradient at the last pre-activation is (p - t)/n,
  // which stays finite when the sigmoid saturates.
  BackwardResult head_back;
  const bool fused = loss.kind == LossKind::bce &&
                     head.layers().back().activation == Activation::sigmoid;
  if (fused) {
    const double n = static_cast<double>(fwd.pred.size());
    Matrix preact_grad = (fwd.pred - target) / n;
    head_back = backward(head, fwd.head_cache, preact_grad, /*upstream_at_last_preactivation=*/true);
  } else {
    head_back = backward(head, fwd.head_cache, loss_grad);
  }
  BackwardResult enc_back = backward(net.encoder(), fwd.encoder_cache, head_back.input_grad);

  GradientBundle bundle;
  bundle.source_task = task;
  bundle.grad_shared = enc_back.grads.flat();
  if (task == Task::main)
    bundle.grad_main = head_back.grads.flat();
  else
    bundle.grad_aux = head_back.grads.flat();

  ++net.counters().backward_passes;
  return {value, std::move(bundle)};
}

void apply_update(MultiTaskNet& net, ParamGroup group, const Vector& grad, double step_size) {
  net.group(group).add_scaled(grad, -step_size);
}

const Vector& ParamSnapshot::values(ParamGroup g) const {
  const auto& v = values_[index(g)];
  if (!v) throw ContractError("ParamSnapshot: group not captured");
  return *v;
}

ParamSnapshot snapshot(const MultiTaskNet& net, unsigned groups_mask) {
  ParamSnapshot snap;
  for (ParamGroup g : {ParamGroup::shared, ParamGroup::head_main, ParamGroup::head_aux}) {
    if (groups_mask & group_bit(g)) snap.values_[ParamSnapshot::index(g)] = net.group(g).flat_params();
  }
  return snap;
}

void restore(MultiTaskNet& net, const ParamSnapshot& snap) {
  for (ParamGroup g : {ParamGroup::shared, ParamGroup::head_main, ParamGroup::head_aux}) {
    const auto& v = snap.values_[ParamSnapshot::index(g)];
    if (!v) continue;
    if (v->size() != net.group(g).param_count())
      throw ContractError("restore: snapshot does not match network shape");
    net.group(g).set_flat_params(*v);
  }
}

namespace {

constexpr char kCkptMagic[8] = {'H', 'Y', 'D', 'A', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kCkptVersion = 1;

template <class T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw DataError("checkpoint: truncated file");
  return v;
}

}  // namespace

void save_checkpoint(const MultiTaskNet& net, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("checkpoint: cannot open for writing: " + path.string());
  os.write(kCkptMagic, sizeof(kCkptMagic));
  write_pod(os, kCkptVersion);
  for (ParamGroup g : {ParamGroup::shared, ParamGroup::head_main, ParamGroup::head_aux}) {
    const Mlp& m = net.group(g);
    write_pod(os, static_cast<std::uint32_t>(m.layer_count()));
    for (const auto& l : m.layers()) {
      write_pod(os, static_cast<std::uint32_t>(l.in_dim()));
      write_pod(os, static_cast<std::uint32_t>(l.out_dim()));
    }
  }
  for (ParamGroup g : {ParamGroup::shared, ParamGroup::head_main, ParamGroup::head_aux}) {
    const Vector flat = net.group(g).flat_params();
    os.write(reinterpret_cast<const char*>(flat.data()),
             static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(flat.size())));
  }
  if (!os) throw DataError("checkpoint: write failed: " + path.string());
}

void load_checkpoint(MultiTaskNet& net, const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("checkpoint: cannot open: " + path.string());
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kCkptMagic, sizeof(magic)) != 0)
    throw DataError("checkpoint: bad magic: " + path.string());
  if (read_pod<std::uint32_t>(is) != kCkptVersion)
    throw DataError("checkpoint: unsupported version");
  for (ParamGroup g : {ParamGroup::shared, ParamGroup::head_main, ParamGroup::head_aux}) {
    const Mlp& m = net.group(g);
    const auto n_layers = read_pod<std::uint32_t>(is);
    if (n_layers != static_cast<std::uint32_t>(m.layer_count()))
      throw DataError("checkpoint: layer count mismatch");
    for (const auto& l : m.layers()) {
      const auto in = read_pod<std::uint32_t>(is);
      const auto out = read_pod<std::uint32_t>(is);
      if (in != static_cast<std::uint32_t>(l.in_dim()) ||
          out != static_cast<std::uint32_t>(l.out_dim()))
        throw DataError("checkpoint: layer dims mismatch");
    }
  }
  for (ParamGroup g : {ParamGroup::shared, ParamGroup::head_main, ParamGroup::head_aux}) {
    Vector flat(net.group(g).param_count());
    is.read(reinterpret_cast<char*>(flat.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(flat.size())));
    if (!is) throw DataError("checkpoint: truncated payload");
    net.group(g).set_flat_params(flat);
  }
}

}  // namespace hyda
