#ifndef VECDOCK_H
#define VECDOCK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum VdStatus {
  VD_STATUS_OK = 0,
  VD_STATUS_NULL_POINTER = 1,
  VD_STATUS_INVALID_ARGUMENT = 2,
  VD_STATUS_PARSE = 3,
  VD_STATUS_IO = 4,
  VD_STATUS_TOPOLOGY = 5,
  VD_STATUS_GRID = 6,
  VD_STATUS_POSE = 7,
  VD_STATUS_CONFIG = 8,
  VD_STATUS_BUFFER_TOO_SMALL = 9,
  VD_STATUS_PANIC = 10,
} VdStatus;

// Scoring backend selectors accepted by the `backend` arguments.
typedef enum VdBackend {
  VD_BACKEND_REFERENCE = 0,
  VD_BACKEND_SCALAR = 1,
  VD_BACKEND_SIMD = 2,
} VdBackend;

// A set of precomputed grid maps.
typedef struct VdGrid VdGrid;

// A parsed or generated ligand.
typedef struct VdLigand VdLigand;

// Search settings for `vd_dock`. Start from `vd_dock_params_default`.
typedef struct VdDockParams {
  size_t population_size;
  size_t generations;
  uint64_t seed;
} VdDockParams;

// Energy components in kcal/mol.
typedef struct VdScore {
  float inter;
  float intra;
  float torsional;
  float total;
} VdScore;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *vd_version(void);

// Message of the most recent failure on this thread, or NULL if no call on
// this thread has failed. The pointer stays valid until the next failing
// call on the same thread.
const char *vd_last_error(void);

// Settings matching the library defaults.
struct VdDockParams vd_dock_params_default(void);

// Reads a grid map file written by `vecdock grid` or `vd_grid_save`.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum VdStatus vd_grid_load(const char *path, struct VdGrid **out);

// Builds maps for every atom type of the default parameter table from a
// receptor in PDBQT text, on a box of `dims[0] x dims[1] x dims[2]` points
// centered at `center`.
//
// # Safety
// `receptor_pdbqt` must be a NUL-terminated string, `center` must point to
// three floats, `dims` to three sizes and `out` must be valid.
enum VdStatus vd_grid_build(const char *receptor_pdbqt,
                            const float *center,
                            const size_t *dims,
                            float spacing,
                            struct VdGrid **out);

// Writes `grid` to `path` in the binary map format.
//
// # Safety
// `grid` must be a live handle and `path` a NUL-terminated string.
enum VdStatus vd_grid_save(const struct VdGrid *grid, const char *path);

// Box geometry. Any output pointer may be NULL.
//
// # Safety
// `grid` must be a live handle. Non-NULL `origin` and `dims` must have room
// for three values.
enum VdStatus vd_grid_info(const struct VdGrid *grid, float *origin, size_t *dims, float *spacing);

// Releases a grid. NULL is ignored.
//
// # Safety
// `grid` must be NULL or a handle not yet freed.
void vd_grid_free(struct VdGrid *grid);

// Parses a ligand from PDBQT text.
//
// # Safety
// `pdbqt` must be a NUL-terminated string and `out` a valid pointer.
enum VdStatus vd_ligand_parse(const char *pdbqt, struct VdLigand **out);

// Generates a deterministic synthetic ligand.
//
// # Safety
// `out` must be a valid pointer.
enum VdStatus vd_ligand_synthetic(uint64_t seed,
                                  size_t n_atoms,
                                  size_t n_torsions,
                                  struct VdLigand **out);

// Number of atoms, or 0 for NULL.
//
// # Safety
// `ligand` must be NULL or a live handle.
size_t vd_ligand_n_atoms(const struct VdLigand *ligand);

// Genotype length: 3 translation, 4 quaternion, then one angle per torsion.
// Returns 0 for NULL.
//
// # Safety
// `ligand` must be NULL or a live handle.
size_t vd_ligand_n_genes(const struct VdLigand *ligand);

// Releases a ligand. NULL is ignored.
//
// # Safety
// `ligand` must be NULL or a handle not yet freed.
void vd_ligand_free(struct VdLigand *ligand);

// Scores one genotype of `n_genes` values.
//
// # Safety
// Handles must be live, `genes` must point to `n_genes` floats and `out`
// must be valid.
enum VdStatus vd_score(const struct VdLigand *ligand,
                       const struct VdGrid *grid,
                       int backend,
                       const float *genes,
                       size_t n_genes,
                       struct VdScore *out);

// Runs a docking search. The best score goes to `out`. When `best_genes`
// is not NULL the best genotype is copied there; it must have room for
// `vd_ligand_n_genes` values, declared in `genes_capacity`.
//
// # Safety
// Handles must be live, `params` and `out` valid, and `best_genes` NULL or
// pointing to `genes_capacity` writable floats.
enum VdStatus vd_dock(const struct VdLigand *ligand,
                      const struct VdGrid *grid,
                      int backend,
                      const struct VdDockParams *params,
                      struct VdScore *out,
                      float *best_genes,
                      size_t genes_capacity);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VECDOCK_H */
