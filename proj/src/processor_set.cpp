#include "fatnode/processor_set.hpp"

#include <bit>
#include <stdexcept>
#include <string>

namespace fatnode {

namespace {
constexpr int kWordBits = 64;
}

ProcessorSet::ProcessorSet(int nproc) : nproc_(nproc) {
    if (nproc < 0) throw std::logic_error("ProcessorSet capacity must be >= 0");
    words_.assign((nproc + kWordBits - 1) / kWordBits, 0);
}

ProcessorSet ProcessorSet::full(int nproc) {
    ProcessorSet s(nproc);
    for (int id = 0; id < nproc; ++id) s.set(id);
    return s;
}

void ProcessorSet::check_id(int id) const {
    if (id < 0 || id >= nproc_)
        throw std::logic_error("processor id " + std::to_string(id) +
                               " out of range [0, " + std::to_string(nproc_) + ")");
}

int ProcessorSet::count() const {
    int n = 0;
    for (std::uint64_t w : words_) n += std::popcount(w);
    return n;
}

bool ProcessorSet::test(int id) const {
    check_id(id);
    return (words_[id / kWordBits] >> (id % kWordBits)) & 1u;
}

void ProcessorSet::set(int id) {
    check_id(id);
    words_[id / kWordBits] |= (std::uint64_t{1} << (id % kWordBits));
}

void ProcessorSet::reset(int id) {
    check_id(id);
    words_[id / kWordBits] &= ~(std::uint64_t{1} << (id % kWordBits));
}

ProcessorSet ProcessorSet::take_lowest(int n) {
    if (n < 0 || n > count())
        throw std::logic_error("take_lowest(" + std::to_string(n) + ") from a set of " +
                               std::to_string(count()));
    ProcessorSet taken(nproc_);
    int remaining = n;
    for (std::size_t w = 0; w < words_.size() && remaining > 0; ++w) {
        while (words_[w] != 0 && remaining > 0) {
            const int bit = std::countr_zero(words_[w]);
            words_[w] &= words_[w] - 1;  // clear lowest set bit
            taken.words_[w] |= (std::uint64_t{1} << bit);
            --remaining;
        }
    }
    return taken;
}

void ProcessorSet::unite(const ProcessorSet& other) {
    if (other.nproc_ != nproc_)
        throw std::logic_error("uniting ProcessorSets of different capacity");
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] |= other.words_[w];
}

bool ProcessorSet::disjoint_with(const ProcessorSet& other) const {
    if (other.nproc_ != nproc_)
        throw std::logic_error("comparing ProcessorSets of different capacity");
    for (std::size_t w = 0; w < words_.size(); ++w)
        if ((words_[w] & other.words_[w]) != 0) return false;
    return true;
}

std::vector<int> ProcessorSet::to_vector() const {
    std::vector<int> ids;
    ids.reserve(count());
    for (std::size_t w = 0; w < words_.size(); ++w) {
        std::uint64_t word = words_[w];
        while (word != 0) {
            const int bit = std::countr_zero(word);
            word &= word - 1;
            ids.push_back(static_cast<int>(w) * kWordBits + bit);
        }
    }
    return ids;
}

}  // namespace fatnode
