#pragma once

#include <cstdint>
#include <vector>

namespace fatnode {

// Set of logical processor IDs in [0, nproc). Backed by a word bitmap.
class ProcessorSet {
public:
    ProcessorSet() = default;
    explicit ProcessorSet(int nproc);

    // Every ID in [0, nproc).
    static ProcessorSet full(int nproc);

    int capacity() const { return nproc_; }
    int count() const;
    bool empty() const { return count() == 0; }

    bool test(int id) const;
    void set(int id);
    void reset(int id);

    // Removes the n lowest member IDs from this set and returns them as a new
    // set with the same capacity. Throws std::logic_error if n exceeds count().
    ProcessorSet take_lowest(int n);

    void unite(const ProcessorSet& other);
    bool disjoint_with(const ProcessorSet& other) const;

    // Member IDs in ascending order.
    std::vector<int> to_vector() const;

    bool operator==(const ProcessorSet& other) const = default;

private:
    void check_id(int id) const;

    int nproc_ = 0;
    std::vector<std::uint64_t> words_;
};

}  // namespace fatnode
