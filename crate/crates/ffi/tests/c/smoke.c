#include <stdio.h>
#include <string.h>

#include "synthprune.h"

int main(void) {
    size_t widths[] = {27, 16, 8, 1};
    SpNetwork *net = NULL;
    SpMask *mask = NULL;
    if (sp_network_init_dense(widths, 4, 1, &net) != SP_STATUS_OK) return 1;
    if (sp_mask_walk_init(widths, 4, 1, &mask) != SP_STATUS_OK) return 2;
    if (sp_network_set_mask(net, mask) != SP_STATUS_OK) return 3;

    double inputs[27 * 2];
    for (int i = 0; i < 27 * 2; i++) inputs[i] = (i % 5) * 0.25 - 0.5;
    double scores[2];
    size_t len = 0;
    if (sp_network_forward(net, inputs, 2, scores, 2, &len) != SP_STATUS_OK || len != 2) return 4;
    if (!(scores[0] > 0.0 && scores[0] < 1.0)) return 5;

    double sparsity = 0.0;
    sp_network_sparsity(net, &sparsity);

    size_t bad[] = {3, 1};
    SpNetwork *none = NULL;
    if (sp_network_init_dense(bad, 2, 0, &none) != SP_STATUS_INVALID_ARGUMENT) return 6;
    if (strstr(sp_last_error_message(), "architecture") == NULL) return 7;

    printf("%.6f %.6f %.4f\n", scores[0], scores[1], sparsity);
    sp_network_free(net);
    sp_mask_free(mask);
    return 0;
}
