#include <stdio.h>

#include "planar_ar.h"

int main(void) {
    PlanarArParams p = {-0.1, 0.5, 0.2, 0.72};
    PlanarArAcfGrid *grid = NULL;
    if (planar_ar_acf_grid_new(&p, -2, 3, -3, 3, &grid) != PLANAR_AR_STATUS_OK) {
        fprintf(stderr, "%s\n", planar_ar_last_error());
        return 1;
    }
    for (int64_t h2 = 3; h2 >= -3; h2--) {
        for (int64_t h1 = -2; h1 <= 3; h1++) {
            double v = 0.0;
            planar_ar_acf_grid_get(grid, h1, h2, &v);
            printf("%10.6f", v);
        }
        printf("\n");
    }
    planar_ar_acf_grid_free(grid);

    PlanarArParams bad = {0.5, 0.5, 0.5, 1.0};
    double v;
    if (planar_ar_acf(&bad, 0, 0, &v) == PLANAR_AR_STATUS_NONSTATIONARY) {
        printf("rejected: %s\n", planar_ar_last_error());
    }
    return 0;
}
