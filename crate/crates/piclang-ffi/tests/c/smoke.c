#include <stdio.h>
#include <string.h>
#include "piclang.h"

#define CHECK(call)                                                       \
    do {                                                                  \
        PiclangStatus s_ = (call);                                        \
        if (s_ != PICLANG_STATUS_OK) {                                    \
            fprintf(stderr, "%s -> %d: %s\n", #call, s_, piclang_last_error()); \
            return 1;                                                     \
        }                                                                 \
    } while (0)

static const char *TILING =
    "{\"sigma\":[\"a\",\"b\"],\"gamma\":[\"a\",\"b\"],\"pi\":{\"a\":\"a\",\"b\":\"b\"},"
    "\"deltas\":[[[\"#\",\"a\"],[\"a\",\"b\"],[\"b\",\"a\"],[\"b\",\"#\"]]]}";

int main(void) {
    PiclangTiling *ts = NULL;
    PiclangPicture *yes = NULL, *no = NULL;
    PiclangSentence *f = NULL;
    bool member = false;

    CHECK(piclang_tiling_from_json(TILING, &ts));
    CHECK(piclang_picture_parse("1 4\na b\na b a b\n", &yes));
    CHECK(piclang_picture_parse("1 3\na b\na b a\n", &no));
    CHECK(piclang_tiling_recognizes(ts, yes, &member));
    if (!member) return 2;
    CHECK(piclang_tiling_to_sentence(ts, &f));
    CHECK(piclang_sentence_check(f, no, &member));
    if (member) return 3;

    char *tree = NULL;
    CHECK(piclang_perm_tree(4, &tree));
    int lines = 0;
    for (char *c = tree; *c; c++) lines += *c == '\n';
    piclang_string_free(tree);
    if (lines != 24) return 4;

    PiclangSentence *bad = NULL;
    if (piclang_sentence_parse("(forall (x)", PICLANG_ENCODING_PIXEL, 1, "a,b", &bad) != PICLANG_STATUS_PARSE) return 5;
    if (strstr(piclang_last_error(), "line 1") == NULL) return 6;

    piclang_sentence_free(f);
    piclang_picture_free(yes);
    piclang_picture_free(no);
    piclang_tiling_free(ts);
    puts("ok");
    return 0;
}
