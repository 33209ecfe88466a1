/* Build: cc examples/score_claim.c -Iinclude -L../../target/debug -loutletcheck_ffi -o score_claim */
#include <stdio.h>
#include "outletcheck.h"

int main(int argc, char **argv) {
    if (argc != 3) {
        fprintf(stderr, "usage: %s <config.toml> <claim>\n", argv[0]);
        return 1;
    }
    OcEngine *engine = NULL;
    if (oc_engine_open(argv[1], &engine) != OC_STATUS_OK) {
        fprintf(stderr, "open: %s\n", oc_last_error_message());
        return 2;
    }
    char *json = NULL;
    OcStatus st = oc_score_claim_json(engine, argv[2], &json);
    if (st != OC_STATUS_OK) {
        fprintf(stderr, "score: %s\n", oc_last_error_message());
        oc_engine_free(engine);
        return 2;
    }
    fputs(json, stdout);
    oc_string_free(json);
    oc_engine_free(engine);
    return 0;
}
