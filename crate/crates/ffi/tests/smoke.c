#include <stdio.h>
#include <string.h>
#include "kgrec.h"

int main(int argc, char **argv) {
    if (argc != 2) return 2;
    size_t d = 0;
    if (kgrec_levenshtein("kitten", "sitting", &d) != KGREC_STATUS_OK || d != 3) return 3;

    KgrecEngine *engine = NULL;
    KgrecStatus st = kgrec_engine_open(argv[1], &engine);
    if (st != KGREC_STATUS_OK) {
        fprintf(stderr, "open: %s\n", kgrec_last_error_message());
        return 4;
    }
    size_t n = 0;
    kgrec_engine_movie_count(engine, &n);
    printf("movies %zu\n", n);

    double w[5] = {1.0, 0.5, 0.5, 0.5, 0.5};
    char *json = NULL;
    st = kgrec_engine_recommend_json(engine, "mv000", 3, w, &json);
    if (st != KGREC_STATUS_OK) {
        fprintf(stderr, "recommend: %s\n", kgrec_last_error_message());
        return 5;
    }
    printf("%s\n", json);
    kgrec_string_free(json);

    st = kgrec_engine_recommend_json(engine, "missing", 3, NULL, &json);
    if (st != KGREC_STATUS_NOT_FOUND) return 6;

    kgrec_engine_free(engine);
    return 0;
}
